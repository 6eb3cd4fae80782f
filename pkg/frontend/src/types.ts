// Payload types mirroring the JSON API. The client renders server geometry
// and indices as-is; nothing here is recomputed locally.

export interface CityInfo {
  city_id: string;
  name: string;
  aliases: string[];
  bbox: { lat_min: number; lat_max: number; lon_min: number; lon_max: number };
}

export interface SeriesPoint {
  period: string;
  value: number | null;
  source: "observed" | "forecast";
  news_count: number;
  unbounded_min_years?: number | null;
}

export interface SeriesPayload {
  city_id: string;
  index: string;
  resolution: string;
  points: SeriesPoint[];
}

export interface HistogramPayload {
  bin_edges: number[];
  counts: number[];
}

export interface GlyphBand {
  percentile_lo: number;
  percentile_hi: number;
  temp_lo: number;
  temp_hi: number;
  color_band_index: number;
}

export interface ThermoglyphPayload {
  city_id: string;
  palette: string[];
  bands: GlyphBand[];
  current?: { date: string; temperature: number; percentile: number; band: number };
}

export interface SpatialCell {
  lat: number;
  lon: number;
  value: number;
}

export interface SpatialMarker {
  article_id: string;
  lat: number;
  lon: number;
  approx: boolean;
  date: string;
}

export interface SpatialPayload {
  city_id: string;
  date: string;
  index: string;
  cells: SpatialCell[];
  citywide_mean: number | null;
  markers: SpatialMarker[];
  cluster_radius: number;
}

export interface HeatwaveEvent {
  start_date: string;
  end_date: string;
  duration: number;
  peak_temp: number;
  threshold_percentile: number;
}

export interface TopicInfo {
  cluster_id: number;
  label: string;
  article_count: number;
  member_tags: string[];
  article_ids: string[];
  hex: { q: number; r: number; intensity: number } | null;
}

export interface TopicsPayload {
  search_id: string;
  topics: TopicInfo[];
}

export interface CoxcombSector {
  label: string;
  start_angle: number;
  sweep: number;
  radius: number;
  count: number | null;
}

export interface CoxcombSpec {
  has_casualty: boolean;
  center_radius: number;
  sectors: CoxcombSector[];
}

export interface GlyphInfo {
  article_id: string;
  cell: [number, number];
  raw: [number, number];
  importance: number;
  coxcomb: CoxcombSpec;
}

export interface LayoutPayload {
  search_id: string;
  cell_size: number;
  glyphs: GlyphInfo[];
}

export interface FacetRow {
  total: number;
  filtered: number;
  bin?: string;
  bin_lo?: number;
  bin_hi?: number;
}

export interface FacetsPayload {
  time: FacetRow[];
  temperature: FacetRow[];
  casualty: FacetRow[];
  filtered_count: number;
}

export interface Casualty {
  deaths: number | null;
  injuries: number | null;
  impacted: number | null;
}

export interface StructuralInfo {
  is_heat_risk: boolean;
  location: string;
  event_date: string;
  completion_flags: string[];
  risk: string;
  consequence: string;
  reason: string;
  temperature: number | null;
  casualty: Casualty;
  advice: string;
  tags: string[];
}

export interface Article {
  id: string;
  title: string;
  body: string;
  char_count: number;
  published_at: string;
  publisher: string;
  media_type: string;
  geo?: { lat: number; lon: number };
  structural?: StructuralInfo;
  highlight_spans?: HighlightSpan[];
}

export interface HighlightSpan {
  field: string;
  start: number;
  end: number;
}

export interface NewsPage {
  page: number;
  page_size: number;
  total: number;
  items: Article[];
}

export interface QaResponse {
  text: string;
  references: string[];
}

export interface SessionPayload {
  session_id: string;
  city_id: string;
  selected_date: string;
  index_kind: string;
  resolution: string;
  search_id: string | null;
  pins: { text: string; source_refs: string[]; timestamp: string }[];
  qa_history: { question: string; answer: string; references: string[]; timestamp: string }[];
}

export interface RiskCurvePayload {
  city_id: string;
  mmt: number;
  points: { temp: number; rr: number }[];
}

export interface RepresentativeBin {
  temp_lo: number;
  temp_hi: number;
  article_id: string;
  deaths: number;
}

export interface RepresentativePayload {
  city_id: string;
  bins: RepresentativeBin[];
}

// Typed API client. Concurrent identical requests (same endpoint + params)
// are deduplicated onto one in-flight fetch.

import type {
  Article,
  CityInfo,
  FacetsPayload,
  HeatwaveEvent,
  HistogramPayload,
  LayoutPayload,
  NewsPage,
  QaResponse,
  RepresentativePayload,
  RiskCurvePayload,
  SeriesPayload,
  SessionPayload,
  SpatialPayload,
  ThermoglyphPayload,
  TopicsPayload,
} from "./types.js";

export class ApiError extends Error {
  constructor(public status: number, public code: string, message: string,
              public detail?: unknown) {
    super(message);
  }
}

type FetchLike = (url: string, init?: RequestInit) => Promise<Response>;

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(private base: string = "", private fetcher: FetchLike =
              (url, init) => fetch(url, init)) {}

  private request<T>(method: string, path: string, body?: unknown): Promise<T> {
    const key = `${method} ${path} ${body === undefined ? "" : JSON.stringify(body)}`;
    const existing = this.inflight.get(key);
    if (existing) return existing as Promise<T>;
    const promise = (async () => {
      const init: RequestInit = { method, headers: { "Content-Type": "application/json" } };
      if (body !== undefined) init.body = JSON.stringify(body);
      const resp = await this.fetcher(this.base + path, init);
      const payload = await resp.json();
      if (!resp.ok) {
        throw new ApiError(resp.status, payload.code ?? "error",
                           payload.message ?? resp.statusText, payload.detail);
      }
      return payload as T;
    })();
    this.inflight.set(key, promise);
    return (promise.finally(() => this.inflight.delete(key)) as Promise<T>);
  }

  private query(params: Record<string, string | number | undefined>): string {
    const parts = Object.entries(params)
      .filter(([, v]) => v !== undefined)
      .map(([k, v]) => `${encodeURIComponent(k)}=${encodeURIComponent(String(v))}`);
    return parts.length ? `?${parts.join("&")}` : "";
  }

  cities(): Promise<CityInfo[]> {
    return this.request("GET", "/api/cities");
  }

  series(cityId: string, index: string, resolution: string,
         dateFrom?: string, dateTo?: string): Promise<SeriesPayload> {
    return this.request("GET", `/api/climate/${cityId}/series` + this.query(
      { index, resolution, date_from: dateFrom, date_to: dateTo }));
  }

  histogram(cityId: string): Promise<HistogramPayload> {
    return this.request("GET", `/api/climate/${cityId}/histogram`);
  }

  thermoglyph(cityId: string, dateAt?: string): Promise<ThermoglyphPayload> {
    return this.request("GET", `/api/climate/${cityId}/thermoglyph` +
      this.query({ date_at: dateAt }));
  }

  spatial(cityId: string, dateAt: string, index: string): Promise<SpatialPayload> {
    return this.request("GET", `/api/climate/${cityId}/spatial` +
      this.query({ date_at: dateAt, index }));
  }

  heatwaves(cityId: string): Promise<HeatwaveEvent[]> {
    return this.request("GET", `/api/climate/${cityId}/heatwaves`);
  }

  keywords(cityId: string, dateAt: string): Promise<{ keywords: string[] }> {
    return this.request("GET", "/api/keywords" +
      this.query({ city_id: cityId, date_at: dateAt }));
  }

  search(cityId: string, keywords: string[]):
      Promise<{ search_id: string; ids: string[]; total: number }> {
    return this.request("POST", "/api/search", { city_id: cityId, keywords });
  }

  topics(searchId: string): Promise<TopicsPayload> {
    return this.request("GET", `/api/search/${searchId}/topics`);
  }

  layout(searchId: string): Promise<LayoutPayload> {
    return this.request("GET", `/api/search/${searchId}/layout`);
  }

  facets(searchId: string): Promise<FacetsPayload> {
    return this.request("GET", `/api/search/${searchId}/facets`);
  }

  applyFilters(searchId: string, rules: object): Promise<{ ids: string[] }> {
    return this.request("POST", `/api/search/${searchId}/filters`, rules);
  }

  rank(searchId: string, queryText: string): Promise<{ order: string[] }> {
    return this.request("POST", `/api/search/${searchId}/rank`,
                        { query_text: queryText });
  }

  newsPage(searchId: string, page: number, pageSize: number): Promise<NewsPage> {
    return this.request("GET", `/api/search/${searchId}/news` +
      this.query({ page, page_size: pageSize }));
  }

  newsDetail(articleId: string): Promise<Article> {
    return this.request("GET", `/api/news/${articleId}`);
  }

  qa(question: string, scope: string[], sessionId?: string): Promise<QaResponse> {
    return this.request("POST", "/api/qa",
                        { question, scope, session_id: sessionId });
  }

  pin(sessionId: string, text: string, sourceRefs: string[]): Promise<SessionPayload> {
    return this.request("POST", "/api/session/pin",
                        { session_id: sessionId, text, source_refs: sourceRefs });
  }

  updateSession(sessionId: string, update: object): Promise<SessionPayload> {
    return this.request("POST", `/api/session/${sessionId}`, update);
  }

  session(sessionId: string): Promise<SessionPayload> {
    return this.request("GET", `/api/session/${sessionId}`);
  }

  report(sessionId: string): Promise<{ report: string }> {
    return this.request("POST", "/api/report", { session_id: sessionId });
  }

  riskCurve(cityId: string): Promise<RiskCurvePayload> {
    return this.request("GET", `/api/risk/${cityId}/curve`);
  }

  representative(cityId: string): Promise<RepresentativePayload> {
    return this.request("GET", `/api/risk/${cityId}/representative`);
  }
}

// Single source of truth for cross-view coordination. Every highlight in
// every view derives from the one hovered entity recorded here.

export type HoveredEntity =
  | { kind: "topic"; id: number }
  | { kind: "article"; id: string }
  | { kind: "temperature"; value: number }
  | null;

export interface ViewState {
  cityId: string;
  selectedDate: string;
  indexKind: "temperature" | "percentile" | "return_period";
  resolution: "daily" | "monthly" | "yearly";
  rangeFrom: string;
  rangeTo: string;
  searchId: string | null;
  includeTopics: Set<number>;
  excludeTopics: Set<number>;
  facetBrushes: object;
  hovered: HoveredEntity;
  selectedArticle: string | null;
  sessionId: string;
  page: number;
}

export function initialState(): ViewState {
  return {
    cityId: "",
    selectedDate: "",
    indexKind: "temperature",
    resolution: "daily",
    rangeFrom: "",
    rangeTo: "",
    searchId: null,
    includeTopics: new Set(),
    excludeTopics: new Set(),
    facetBrushes: {},
    hovered: null,
    selectedArticle: null,
    sessionId: "analyst",
    page: 1,
  };
}

type Listener = (state: ViewState) => void;

export class Store {
  private state: ViewState = initialState();
  private listeners: Listener[] = [];

  getState(): ViewState {
    return this.state;
  }

  update(partial: Partial<ViewState>): void {
    this.state = { ...this.state, ...partial };
    for (const fn of this.listeners) fn(this.state);
  }

  subscribe(fn: Listener): () => void {
    this.listeners.push(fn);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== fn);
    };
  }
}

/** Toggle show/hide for one topic: first double-click hides it, next restores. */
export function toggleTopicExclusion(state: ViewState, topicId: number): {
  includeTopics: Set<number>;
  excludeTopics: Set<number>;
} {
  const exclude = new Set(state.excludeTopics);
  if (exclude.has(topicId)) {
    exclude.delete(topicId);
  } else {
    exclude.add(topicId);
  }
  return { includeTopics: new Set(state.includeTopics), excludeTopics: exclude };
}

import type { Granularity, NodeKind, TrendMetric } from "./types.js";

export interface GraphFilter {
  minOccurrence: number;
  topK: number | null;
  /** null means all kinds; otherwise only these are requested and rendered. */
  kinds: NodeKind[] | null;
}

/**
 * Everything the user can point the dashboard at. Views are pure functions
 * of this plus the most recent API responses, so the whole UI can be
 * replayed from a (state, responses) pair.
 */
export interface ViewState {
  /** ISO dates; null leaves the bound to the server default (full range). */
  from: string | null;
  to: string | null;
  platform: string | null;
  metric: TrendMetric;
  granularity: Granularity;
  selectedTopicIds: number[];
  graph: GraphFilter;
  channel: string | null;
}

const ISO_DAY = /^\d{4}-\d{2}-\d{2}$/;

export function initialViewState(): ViewState {
  return {
    from: null,
    to: null,
    platform: null,
    metric: "sentiment",
    granularity: "day",
    selectedTopicIds: [],
    graph: { minOccurrence: 0, topK: null, kinds: null },
    channel: null,
  };
}

/**
 * Replace the date range. Bounds must be ISO days and from <= to; ISO dates
 * order lexicographically so a string compare is enough.
 */
export function setRange(state: ViewState, from: string | null, to: string | null): ViewState {
  for (const bound of [from, to]) {
    if (bound !== null && !ISO_DAY.test(bound)) {
      throw new RangeError(`not an ISO date: ${bound}`);
    }
  }
  if (from !== null && to !== null && from > to) {
    throw new RangeError(`from ${from} is after to ${to}`);
  }
  return { ...state, from, to };
}

export function toggleTopic(state: ViewState, topicId: number): ViewState {
  const selected = state.selectedTopicIds.includes(topicId)
    ? state.selectedTopicIds.filter((id) => id !== topicId)
    : [...state.selectedTopicIds, topicId].sort((a, b) => a - b);
  return { ...state, selectedTopicIds: selected };
}

export function setGraphFilter(state: ViewState, patch: Partial<GraphFilter>): ViewState {
  return { ...state, graph: { ...state.graph, ...patch } };
}

export function setChannel(state: ViewState, channel: string | null): ViewState {
  return { ...state, channel: channel === "" ? null : channel };
}

export function setPlatform(state: ViewState, platform: string | null): ViewState {
  return { ...state, platform: platform === "" ? null : platform };
}

export function setMetric(state: ViewState, metric: TrendMetric): ViewState {
  return { ...state, metric };
}

export function setGranularity(state: ViewState, granularity: Granularity): ViewState {
  return { ...state, granularity };
}

/** DOM-free session controller: holds the read model and talks to the API.
 *
 * The UI layer binds to `view` after every await; nothing in here computes a
 * cost or a utility - all numbers are echoed from service responses. */

import { ApiError, SessionApi } from "./api.js";
import { formatBreakdown, formatTraceRow } from "./format.js";
import type {
  CostLevelsJson,
  HistoryJson,
  ProposalJson,
  SessionCreateBody,
  SessionState,
} from "./types.js";

export interface SessionView {
  sessionId: string | null;
  state: SessionState | "idle";
  banner: string | null;
  proposal: ProposalJson | null;
  proposalBadges: string[]; // per-group "name: CLASS ($)" strings
  proposalCostLine: string | null;
  traceRows: string[]; // formatted, newest last
  bestSeries: { iteration: number; best: number }[];
  costSeries: { cost: number; best: number }[];
  cumulativeCost: number;
  remainingBudget: number | null;
  requestInFlight: boolean;
  costUnit: string;
}

export function emptyView(): SessionView {
  return {
    sessionId: null,
    state: "idle",
    banner: null,
    proposal: null,
    proposalBadges: [],
    proposalCostLine: null,
    traceRows: [],
    bestSeries: [],
    costSeries: [],
    cumulativeCost: 0,
    remainingBudget: null,
    requestInFlight: false,
    costUnit: "units",
  };
}

export class SessionController {
  view: SessionView = emptyView();

  constructor(private api: SessionApi) {}

  private async guarded<T>(label: string, fn: () => Promise<T>): Promise<T | null> {
    if (this.view.requestInFlight) return null; // double-submit prevention
    this.view.requestInFlight = true;
    this.view.banner = null;
    try {
      return await fn();
    } catch (e) {
      this.view.banner =
        e instanceof ApiError ? `${label} failed (${e.status}): ${e.detail}` : String(e);
      return null;
    } finally {
      this.view.requestInFlight = false;
    }
  }

  async create(body: SessionCreateBody): Promise<boolean> {
    const out = await this.guarded("create session", () => this.api.createSession(body));
    if (!out) return false;
    this.view = emptyView();
    this.view.sessionId = out.session_id;
    this.view.state = out.state as SessionState;
    await this.refresh();
    return true;
  }

  async propose(): Promise<ProposalJson | null> {
    if (!this.view.sessionId) return null;
    const sid = this.view.sessionId;
    const proposal = await this.guarded("propose", () => this.api.propose(sid));
    if (!proposal) return null;
    this.view.proposal = proposal;
    this.view.proposalBadges = Object.keys(proposal.class_per_group)
      .sort()
      .map((g) => `${g}: ${proposal.class_per_group[g].toUpperCase()}`);
    this.view.proposalCostLine = formatBreakdown(proposal.believed_cost, this.view.costUnit);
    this.view.state = "awaiting_rating";
    return proposal;
  }

  async observe(performanceScore: number, preferenceScore: number): Promise<boolean> {
    if (!this.view.sessionId) return false;
    const sid = this.view.sessionId;
    const out = await this.guarded("observe", () =>
      this.api.observe(sid, performanceScore, preferenceScore),
    );
    if (!out) return false;
    this.view.proposal = null;
    this.view.proposalBadges = [];
    this.view.proposalCostLine = null;
    this.view.state = out.state;
    await this.refresh();
    return true;
  }

  async reweight(levels: CostLevelsJson): Promise<boolean> {
    if (!this.view.sessionId) return false;
    const sid = this.view.sessionId;
    const out = await this.guarded("reweight costs", () => this.api.reweightCosts(sid, levels));
    return out !== null;
  }

  /** Rebuild the whole read model from the history endpoint (stateless UI). */
  async refresh(): Promise<HistoryJson | null> {
    if (!this.view.sessionId) return null;
    const sid = this.view.sessionId;
    try {
      const hist = await this.api.history(sid);
      this.view.state = hist.state;
      this.view.costUnit = hist.cost_unit;
      this.view.cumulativeCost = hist.cumulative_true_cost;
      this.view.remainingBudget = hist.remaining_budget;
      this.view.traceRows = hist.trace.map((s) => formatTraceRow(s, hist.cost_unit));
      this.view.bestSeries = hist.trace.map((s) => ({
        iteration: s.iteration,
        best: s.best_so_far,
      }));
      this.view.costSeries = hist.trace.map((s) => ({
        cost: s.cumulative_true_cost,
        best: s.best_so_far,
      }));
      return hist;
    } catch (e) {
      this.view.banner = e instanceof ApiError ? e.detail : String(e);
      return null;
    }
  }
}

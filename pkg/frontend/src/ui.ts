/** DOM wiring. All optimization math lives server-side; this file renders the
 * read model and forwards form submissions. */

import { SessionApi } from "./api.js";
import { lineChartSvg } from "./charts.js";
import { SessionController } from "./session.js";
import { joystickSchedule, joystickSessionBody, joystickSpace } from "./template.js";
import type {
  CostLevelsJson,
  DesignSpaceJson,
  GroupKind,
  SessionCreateBody,
} from "./types.js";
import { validateLevels, validateSpace, validateWeights } from "./validate.js";

type ParamRow = { name: string; lower: string; upper: string; snap: string };
type GroupRow = { name: string; parameters: string; kind: GroupKind };

export class App {
  private controller: SessionController;
  private paramRows: ParamRow[] = [];
  private groupRows: GroupRow[] = [];
  private levelsDraft: CostLevelsJson;

  constructor(
    private root: HTMLElement,
    api: SessionApi = new SessionApi(""),
  ) {
    this.controller = new SessionController(api);
    this.levelsDraft = joystickSchedule().base;
    this.loadTemplate();
  }

  loadTemplate(): void {
    const space = joystickSpace();
    this.paramRows = space.parameters.map((p) => ({
      name: p.name,
      lower: String(p.lower),
      upper: String(p.upper),
      snap: p.snap_step === null || p.snap_step === "continuous" ? "" : String(p.snap_step),
    }));
    this.groupRows = space.groups.map((g) => ({
      name: g.name,
      parameters: g.parameters.join(", "),
      kind: g.kind,
    }));
    this.levelsDraft = joystickSchedule().base;
  }

  spaceFromForm(): DesignSpaceJson {
    return {
      schema_version: 1,
      parameters: this.paramRows.map((r) => ({
        name: r.name.trim(),
        lower: Number(r.lower),
        upper: Number(r.upper),
        snap_step: r.snap.trim() === "" ? null : Number(r.snap),
      })),
      groups: this.groupRows.map((r) => ({
        name: r.name.trim(),
        parameters: r.parameters
          .split(",")
          .map((s) => s.trim())
          .filter((s) => s.length > 0),
        kind: r.kind,
      })),
    };
  }

  render(): void {
    const v = this.controller.view;
    const busy = v.requestInFlight ? "disabled" : "";
    const finished = v.state === "finished";
    this.root.innerHTML = `
      ${v.banner ? `<div class="banner">${escapeHtml(v.banner)}</div>` : ""}
      <section class="panel" id="setup" ${v.sessionId ? "hidden" : ""}>
        <h2>Design space</h2>
        <button id="load-template">Load joystick template</button>
        <table class="editor"><thead><tr><th>parameter</th><th>lower</th><th>upper</th><th>snap step</th><th></th></tr></thead>
        <tbody>${this.paramRows
          .map(
            (r, i) => `<tr>
              <td><input data-p="${i}" data-f="name" value="${escapeHtml(r.name)}"></td>
              <td><input data-p="${i}" data-f="lower" value="${escapeHtml(r.lower)}" size="6"></td>
              <td><input data-p="${i}" data-f="upper" value="${escapeHtml(r.upper)}" size="6"></td>
              <td><input data-p="${i}" data-f="snap" value="${escapeHtml(r.snap)}" size="6" placeholder="continuous"></td>
              <td><button data-del-p="${i}">×</button></td></tr>`,
          )
          .join("")}</tbody></table>
        <button id="add-param">+ parameter</button>
        <h2>Components</h2>
        <table class="editor"><thead><tr><th>group</th><th>parameters (comma-sep)</th><th>kind</th><th></th></tr></thead>
        <tbody>${this.groupRows
          .map(
            (r, i) => `<tr>
              <td><input data-g="${i}" data-f="name" value="${escapeHtml(r.name)}"></td>
              <td><input data-g="${i}" data-f="parameters" value="${escapeHtml(r.parameters)}"></td>
              <td><select data-g="${i}" data-f="kind">
                ${(["hardware", "software", "other"] as const)
                  .map((k) => `<option ${k === r.kind ? "selected" : ""}>${k}</option>`)
                  .join("")}
              </select></td>
              <td><button data-del-g="${i}">×</button></td></tr>`,
          )
          .join("")}</tbody></table>
        <button id="add-group">+ component</button>
        <h2>Costs (${escapeHtml(this.levelsDraft.unit)})</h2>
        ${this.renderLevelsTable("setup-levels")}
        <h2>Weights & run</h2>
        <label>performance weight <input id="w-perf" type="number" min="0" max="1" step="0.05" value="0.5"></label>
        <label>iterations <input id="iters" type="number" min="1" value="10"></label>
        <label>seed <input id="seed" type="number" value="0"></label>
        <div id="form-errors" class="errors"></div>
        <button id="create" ${busy}>Create session</button>
      </section>

      <section class="panel" id="live" ${v.sessionId ? "" : "hidden"}>
        <h2>Session ${escapeHtml(v.sessionId ?? "")} <span class="state ${v.state}">${v.state}</span></h2>
        <div class="meta">cumulative cost: <b>${v.cumulativeCost}</b> ${escapeHtml(v.costUnit)}
          ${v.remainingBudget !== null ? ` · remaining budget: <b>${v.remainingBudget}</b>` : ""}</div>
        <div class="actions">
          <button id="propose" ${busy} ${v.state !== "awaiting_proposal" ? "disabled" : ""}>Propose next prototype</button>
          <button id="reweight-open" ${finished ? "disabled" : ""}>Reweight costs…</button>
        </div>
        ${
          v.proposal
            ? `<div class="proposal">
          <h3>Build / reuse (iteration ${v.proposal.iteration}${v.proposal.initialization ? ", initialization" : ""})</h3>
          <ul>${v.proposalBadges.map((b) => `<li class="badge-${badgeClass(b)}">${escapeHtml(b)}</li>`).join("")}</ul>
          <div class="cost-line">${escapeHtml(v.proposalCostLine ?? "")}</div>
          <table class="config">${Object.entries(v.proposal.realized)
            .map(([k, val]) => `<tr><td>${escapeHtml(k)}</td><td>${val}</td></tr>`)
            .join("")}</table>
          <div class="rating">
            <label>performance score <input id="perf" type="number" step="any" value="0"></label>
            <label>comfort 0–100 <input id="pref" type="range" min="0" max="100" value="50">
              <output id="pref-out">50</output></label>
            <button id="observe" ${busy}>Submit rating</button>
          </div></div>`
            : ""
        }
        <div class="charts">
          <figure><figcaption>best-so-far vs iteration</figcaption>
            ${lineChartSvg(v.bestSeries.map((p) => ({ x: p.iteration, y: p.best })), "iteration", "best utility")}</figure>
          <figure><figcaption>best-so-far vs cumulative cost</figcaption>
            ${lineChartSvg(v.costSeries.map((p) => ({ x: p.cost, y: p.best })), `cumulative cost (${escapeHtml(v.costUnit)})`, "best utility")}</figure>
        </div>
        <h3>Trace</h3>
        <ol class="trace">${v.traceRows.map((r) => `<li>${escapeHtml(r)}</li>`).join("")}</ol>
        <dialog id="reweight">
          <h3>Reweight cost levels</h3>
          ${this.renderLevelsTable("dialog-levels")}
          <div id="reweight-errors" class="errors"></div>
          <button id="reweight-submit">Apply from next iteration</button>
          <button id="reweight-cancel">Cancel</button>
        </dialog>
      </section>`;
    this.bind();
  }

  private renderLevelsTable(prefix: string): string {
    return `<table class="editor levels"><thead><tr><th>group</th><th>tweak</th><th>swap</th><th>create</th></tr></thead>
      <tbody>${Object.entries(this.levelsDraft.groups)
        .map(
          ([g, lv]) => `<tr><td>${escapeHtml(g)}</td>${(["tweak", "swap", "create"] as const)
            .map(
              (cls) =>
                `<td><input data-lvl="${prefix}" data-group="${escapeHtml(g)}" data-cls="${cls}" type="number" min="0" step="any" value="${lv[cls]}"></td>`,
            )
            .join("")}</tr>`,
        )
        .join("")}</tbody></table>`;
  }

  private syncLevelsFromInputs(): void {
    this.root.querySelectorAll<HTMLInputElement>("input[data-lvl]").forEach((inp) => {
      const g = inp.dataset.group!;
      const cls = inp.dataset.cls as "tweak" | "swap" | "create";
      if (this.levelsDraft.groups[g]) this.levelsDraft.groups[g][cls] = Number(inp.value);
    });
  }

  private bind(): void {
    const by = (id: string) => this.root.querySelector<HTMLElement>(`#${id}`);
    by("load-template")?.addEventListener("click", () => {
      this.loadTemplate();
      this.render();
    });
    by("add-param")?.addEventListener("click", () => {
      this.syncEditors();
      this.paramRows.push({ name: "", lower: "0", upper: "1", snap: "" });
      this.render();
    });
    by("add-group")?.addEventListener("click", () => {
      this.syncEditors();
      this.groupRows.push({ name: "", parameters: "", kind: "other" });
      this.render();
    });
    this.root.querySelectorAll<HTMLButtonElement>("button[data-del-p]").forEach((b) =>
      b.addEventListener("click", () => {
        this.syncEditors();
        this.paramRows.splice(Number(b.dataset.delP), 1);
        this.render();
      }),
    );
    this.root.querySelectorAll<HTMLButtonElement>("button[data-del-g]").forEach((b) =>
      b.addEventListener("click", () => {
        this.syncEditors();
        this.groupRows.splice(Number(b.dataset.delG), 1);
        this.render();
      }),
    );
    by("create")?.addEventListener("click", () => void this.onCreate());
    by("propose")?.addEventListener("click", () => void this.onPropose());
    by("observe")?.addEventListener("click", () => void this.onObserve());
    const pref = this.root.querySelector<HTMLInputElement>("#pref");
    pref?.addEventListener("input", () => {
      const out = this.root.querySelector<HTMLOutputElement>("#pref-out");
      if (out) out.value = pref.value;
    });
    by("reweight-open")?.addEventListener("click", () => {
      this.root.querySelector<HTMLDialogElement>("#reweight")?.showModal();
    });
    by("reweight-cancel")?.addEventListener("click", () => {
      this.root.querySelector<HTMLDialogElement>("#reweight")?.close();
    });
    by("reweight-submit")?.addEventListener("click", () => void this.onReweight());
  }

  private syncEditors(): void {
    this.root.querySelectorAll<HTMLInputElement>("input[data-p]").forEach((inp) => {
      const row = this.paramRows[Number(inp.dataset.p)];
      (row as unknown as Record<string, string>)[inp.dataset.f!] = inp.value;
    });
    this.root
      .querySelectorAll<HTMLInputElement | HTMLSelectElement>("[data-g]")
      .forEach((inp) => {
        const row = this.groupRows[Number(inp.dataset.g)];
        (row as unknown as Record<string, string>)[inp.dataset.f!] = inp.value;
      });
    this.syncLevelsFromInputs();
  }

  private async onCreate(): Promise<void> {
    this.syncEditors();
    const space = this.spaceFromForm();
    const wPerf = Number(this.root.querySelector<HTMLInputElement>("#w-perf")?.value ?? 0.5);
    const iters = Number(this.root.querySelector<HTMLInputElement>("#iters")?.value ?? 10);
    const seed = Number(this.root.querySelector<HTMLInputElement>("#seed")?.value ?? 0);
    const errors = [
      ...validateSpace(space),
      ...validateLevels(this.levelsDraft.groups),
      ...validateWeights(wPerf, 1 - wPerf),
    ];
    const errBox = this.root.querySelector("#form-errors");
    if (errors.length) {
      if (errBox)
        errBox.innerHTML = errors
          .map((e) => `<div>${escapeHtml(e.path)}: ${escapeHtml(e.message)}</div>`)
          .join("");
      return; // blocked submit
    }
    const body: SessionCreateBody = {
      ...joystickSessionBody(seed, iters, wPerf),
      space,
      schedule: {
        schema_version: 1,
        base: this.levelsDraft,
        overrides: [],
        believed_bias_alpha: 1.0,
        bias_categories: ["tweak", "swap", "create"],
      },
    };
    const sigma: Record<string, number> = {};
    for (const g of space.groups) sigma[g.name] = 0.05;
    body.relaxation = { schema_version: 1, sigma, w_create: 1.0 };
    if (await this.controller.create(body)) this.render();
    else this.render();
  }

  private async onPropose(): Promise<void> {
    await this.controller.propose();
    this.render();
  }

  private async onObserve(): Promise<void> {
    const perf = Number(this.root.querySelector<HTMLInputElement>("#perf")?.value ?? 0);
    const pref = Number(this.root.querySelector<HTMLInputElement>("#pref")?.value ?? 50);
    await this.controller.observe(perf, pref);
    this.render();
  }

  private async onReweight(): Promise<void> {
    this.syncLevelsFromInputs();
    const errors = validateLevels(this.levelsDraft.groups);
    const errBox = this.root.querySelector("#reweight-errors");
    if (errors.length) {
      if (errBox)
        errBox.innerHTML = errors
          .map((e) => `<div>${escapeHtml(e.path)}: ${escapeHtml(e.message)}</div>`)
          .join("");
      return;
    }
    await this.controller.reweight(this.levelsDraft);
    this.root.querySelector<HTMLDialogElement>("#reweight")?.close();
    await this.controller.refresh();
    this.render();
  }
}

function badgeClass(badge: string): string {
  if (badge.includes("CREATE")) return "create";
  if (badge.includes("SWAP")) return "swap";
  return "tweak";
}

function escapeHtml(s: string): string {
  return s
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

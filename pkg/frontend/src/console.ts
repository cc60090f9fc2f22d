// Browser console for the question-answering service.
//
// Everything below the "DOM glue" marker touches the page; everything above
// is a pure view-model over the service's JSON and is what the tests cover.
// The console never recomputes scores: it renders exactly what the service
// returned.

export interface TraceStep {
  direction: string;
  context: string[];
  token: string;
  surface: string;
  score: number;
  confidence: number;
  forced: boolean;
}

export interface InformativeToken {
  surface: string;
  lemma: string;
  pos: string;
}

export interface RankingEntry {
  mlsu_id: number;
  score: number;
  confidence: number;
}

export interface Trace {
  question: string;
  interrogative: string;
  informative: InformativeToken[];
  answer_pos: string | null;
  answer_role: string | null;
  role_pos: string[];
  pos_confidence: number;
  mlsu_id: number | null;
  mlsu_confidence: number;
  mlsu_ranking: RankingEntry[];
  verb: string | null;
  steps: TraceStep[];
  final_answer: string;
  overall_confidence: number;
  rejected: boolean;
  reject_reason: string | null;
  reject_stage: string | null;
  truncated: boolean;
  evidence_exhausted: boolean;
}

export interface AskResponse {
  answer: string | null;
  rejected: boolean;
  reason: string | null;
  confidence: number;
  trace: Trace;
}

export interface ModelStats {
  name: string;
  model_id: number;
  classes: number;
  features: number;
  connections: number;
  precision: number | null;
  recall: number | null;
  f1: number | null;
}

export interface ModelInfo {
  format_version: number;
  created_at: string;
  corpus_hash: string;
  training_mode: string;
  mlsu_count: number;
  models: ModelStats[];
}

export interface StageView {
  title: string;
  reached: boolean;
  note: string;
  rows: string[][];
}

export interface AnswerView {
  kind: "answer" | "rejection";
  headline: string;
  detail: string;
}

export const STAGE_COUNT = 4;

export function formatPercent(value: number): string {
  return (100 * value).toFixed(1) + "%";
}

export function formatScore(value: number): string {
  return value.toFixed(4);
}

export function buildAnswerView(resp: AskResponse): AnswerView {
  if (resp.rejected) {
    const stage = resp.trace.reject_stage ? ` at stage "${resp.trace.reject_stage}"` : "";
    return {
      kind: "rejection",
      headline: "No answer",
      detail: `rejected${stage}: ${resp.reason ?? "unknown"}`,
    };
  }
  return {
    kind: "answer",
    headline: resp.answer ?? "",
    detail: `retrieval confidence ${formatPercent(resp.confidence)}, overall ${formatPercent(
      resp.trace.overall_confidence,
    )}`,
  };
}

export function buildStageViews(resp: AskResponse): StageView[] {
  const t = resp.trace;

  const splitRows: string[][] = [["interrogative", t.interrogative || "(none)"]];
  for (const tok of t.informative) {
    splitRows.push(["informative", `${tok.surface} -> ${tok.lemma} (${tok.pos})`]);
  }
  const split: StageView = {
    title: "1. Question split",
    reached: true,
    note: "",
    rows: splitRows,
  };

  const posReached = t.answer_pos !== null;
  const pos: StageView = {
    title: "2. Answer part of speech",
    reached: posReached,
    note: posReached ? "" : "not reached",
    rows: posReached
      ? [
          ["part of speech", t.answer_pos ?? ""],
          ["role", `${t.answer_role} (${t.role_pos.join(", ")})`],
          ["confidence", formatPercent(t.pos_confidence)],
        ]
      : [],
  };

  const mlsuReached = t.mlsu_ranking.length > 0;
  const unit: StageView = {
    title: "3. Semantic unit",
    reached: mlsuReached,
    note: mlsuReached ? `chosen unit ${t.mlsu_id}${t.verb ? `, verb "${t.verb}"` : ""}` : "not reached",
    rows: t.mlsu_ranking.map((r) => [
      r.mlsu_id === t.mlsu_id ? `unit ${r.mlsu_id} *` : `unit ${r.mlsu_id}`,
      formatScore(r.score),
      formatPercent(r.confidence),
    ]),
  };

  // rows here are 1:1 with the trace's synthesis steps, by contract
  const steps: StageView = {
    title: "4. Synthesis steps",
    reached: !resp.rejected,
    note: resp.rejected ? "not reached" : t.truncated ? "truncated" : "",
    rows: t.steps.map((s) => [
      s.direction,
      s.context.join(" + "),
      s.token,
      s.surface || "(sentinel)",
      formatScore(s.score),
      formatPercent(s.confidence),
    ]),
  };

  return [split, pos, unit, steps];
}

export function buildModelRows(info: ModelInfo): string[][] {
  const rows = info.models.map((m) => [
    m.name,
    String(m.classes),
    String(m.features),
    String(m.connections),
    m.f1 === null ? "-" : m.f1.toFixed(3),
  ]);
  return rows;
}

export interface HistoryEntry {
  question: string;
  threshold: number;
  summary: string;
  rejected: boolean;
}

export function historyEntry(question: string, threshold: number, resp: AskResponse): HistoryEntry {
  const view = buildAnswerView(resp);
  return {
    question,
    threshold,
    summary: view.kind === "answer" ? view.headline : view.detail,
    rejected: resp.rejected,
  };
}

function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;");
}

export function stageHtml(stage: StageView): string {
  const rows = stage.rows
    .map((cells) => `<tr>${cells.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`)
    .join("");
  const note = stage.note ? `<p class="note">${escapeHtml(stage.note)}</p>` : "";
  const table = stage.rows.length ? `<table>${rows}</table>` : "";
  return `<section class="stage ${stage.reached ? "reached" : "skipped"}">` +
    `<h3>${escapeHtml(stage.title)}</h3>${note}${table}</section>`;
}

// ---------------------------------------------------------------------------
// DOM glue

export function initConsole(doc: Document): void {
  const questionInput = doc.getElementById("question") as HTMLInputElement;
  const askButton = doc.getElementById("ask") as HTMLButtonElement;
  const thresholdSlider = doc.getElementById("threshold") as HTMLInputElement;
  const thresholdValue = doc.getElementById("threshold-value") as HTMLElement;
  const answerPanel = doc.getElementById("answer-panel") as HTMLElement;
  const tracePanel = doc.getElementById("trace-panel") as HTMLElement;
  const gauge = doc.getElementById("gauge") as HTMLElement;
  const statsPanel = doc.getElementById("model-stats") as HTMLElement;
  const historyList = doc.getElementById("history") as HTMLElement;

  const history: HistoryEntry[] = [];

  thresholdSlider.addEventListener("input", () => {
    thresholdValue.textContent = Number(thresholdSlider.value).toFixed(2);
  });
  thresholdValue.textContent = Number(thresholdSlider.value).toFixed(2);

  fetch("/api/model")
    .then((r) => r.json() as Promise<ModelInfo>)
    .then((info) => {
      const header = ["model", "classes", "features", "connections", "f1"];
      const rows = [header, ...buildModelRows(info)];
      statsPanel.innerHTML =
        `<p>mode: ${escapeHtml(info.training_mode)}, units: ${info.mlsu_count}</p>` +
        `<table>${rows
          .map((r) => `<tr>${r.map((c) => `<td>${escapeHtml(c)}</td>`).join("")}</tr>`)
          .join("")}</table>`;
    })
    .catch(() => {
      statsPanel.textContent = "model stats unavailable";
    });

  function renderHistory(): void {
    historyList.innerHTML = history
      .map(
        (h) =>
          `<li class="${h.rejected ? "rejected" : "answered"}">` +
          `<span class="q">${escapeHtml(h.question)}</span> @${h.threshold.toFixed(2)} ` +
          `<span class="a">${escapeHtml(h.summary)}</span></li>`,
      )
      .join("");
  }

  async function ask(): Promise<void> {
    const question = questionInput.value.trim();
    if (!question) {
      answerPanel.innerHTML = `<div class="banner error">type a question first</div>`;
      return;
    }
    const threshold = Number(thresholdSlider.value);
    askButton.disabled = true;
    questionInput.disabled = true;
    try {
      const resp = await fetch("/api/ask", {
        method: "POST",
        headers: { "Content-Type": "application/json" },
        body: JSON.stringify({ question, threshold }),
      });
      const payload = await resp.json();
      if (!resp.ok) {
        answerPanel.innerHTML = `<div class="banner error">${escapeHtml(
          payload.error ?? `service error ${resp.status}`,
        )}</div>`;
        return;
      }
      const data = payload as AskResponse;
      const view = buildAnswerView(data);
      if (view.kind === "answer") {
        answerPanel.innerHTML =
          `<div class="card answer"><p class="headline">${escapeHtml(view.headline)}</p>` +
          `<p class="detail">${escapeHtml(view.detail)}</p></div>`;
      } else {
        answerPanel.innerHTML =
          `<div class="banner rejection"><strong>${escapeHtml(view.headline)}</strong> ` +
          `${escapeHtml(view.detail)}</div>`;
      }
      gauge.innerHTML =
        `<div class="bar" style="width:${Math.round(100 * data.confidence)}%"></div>` +
        `<span>${formatPercent(data.confidence)}</span>`;
      tracePanel.innerHTML = buildStageViews(data).map(stageHtml).join("");
      history.unshift(historyEntry(question, threshold, data));
      renderHistory();
    } catch (err) {
      answerPanel.innerHTML = `<div class="banner error">network failure: ${escapeHtml(
        String(err),
      )}</div>`;
    } finally {
      askButton.disabled = false;
      questionInput.disabled = false;
    }
  }

  askButton.addEventListener("click", () => void ask());
  questionInput.addEventListener("keydown", (event) => {
    if ((event as KeyboardEvent).key === "Enter") void ask();
  });
}

if (typeof document !== "undefined" && document.getElementById("ask")) {
  initConsole(document);
}

// Pure renderers: ViewState in, HTML strings out. Keeping these free of
// DOM access means the screen composition is testable without a browser;
// app.ts owns event wiring.

import { mapStateToColor } from "./colors.js";
import type { ViewState } from "./state.js";
import type { AnswerResult, KnowledgeMap, QuizQuestion, Snippet } from "./types.js";

export function escapeHtml(text: string): string {
  return text
    .replace(/&/g, "&amp;")
    .replace(/</g, "&lt;")
    .replace(/>/g, "&gt;")
    .replace(/"/g, "&quot;")
    .replace(/'/g, "&#39;");
}

function section(title: string, body: string, css: string): string {
  return `<section class="${css}"><h2>${escapeHtml(title)}</h2>${body}</section>`;
}

export function renderModeTabs(state: ViewState): string {
  const tab = (mode: string, label: string) => {
    const active = state.mode === mode ? " active" : "";
    return `<button class="tab${active}" data-mode="${mode}">${label}</button>`;
  };
  return `<nav class="tabs">${tab("interactive_learning", "Interactive Learning")}${tab(
    "track_my_progress",
    "Track My Progress",
  )}</nav>`;
}

export function renderTopicSelect(state: ViewState): string {
  const options = state.topics
    .map((t) => {
      const selected = t.topic_id === state.selectedTopic ? " selected" : "";
      return `<option value="${escapeHtml(t.topic_id)}"${selected}>${escapeHtml(t.label)}</option>`;
    })
    .join("");
  return `<select id="topic-select"><option value="">Select a topic</option>${options}</select>`;
}

export function renderSnippetPanel(snippets: Snippet[]): string {
  if (!snippets.length) {
    return `<p class="empty">No retrieved snippets.</p>`;
  }
  const rows = snippets
    .map(
      (s) =>
        `<li class="snippet" data-chunk="${escapeHtml(s.chunk_id)}"><code>${escapeHtml(
          s.chunk_id,
        )}</code> <span class="score">${s.score.toFixed(4)}</span><p>${escapeHtml(s.text)}</p></li>`,
    )
    .join("");
  return `<ol class="snippets">${rows}</ol>`;
}

export function renderFeedbackWidget(state: ViewState): string {
  const pending = state.pendingFeedback;
  if (!pending) {
    return `<p class="empty">Nothing to rate yet.</p>`;
  }
  const disabled = pending.submitted ? " disabled" : "";
  const buttons = [1, 2, 3, 4, 5]
    .map((r) => `<button class="rate" data-rating="${r}"${disabled}>${r}</button>`)
    .join("");
  const note = pending.submitted ? `<p class="thanks">Feedback recorded.</p>` : "";
  return `<div class="feedback" data-level="${pending.level}" data-item="${escapeHtml(
    pending.itemId,
  )}">${buttons}${note}</div>`;
}

export function renderTeachingView(state: ViewState): string {
  const lesson = state.lesson;
  const summary = lesson
    ? `<p>${escapeHtml(lesson.brief_summary)}</p>`
    : `<p class="empty">Pick a topic and a content type to start.</p>`;
  const contentTypePicker = `
    <div class="content-type">
      <button data-content-type="brief_summary">Brief Summary</button>
      <button data-content-type="knowledge_details">Knowledge Details</button>
    </div>`;
  const details =
    lesson && lesson.content_type === "knowledge_details"
      ? ["definitions", "features", "importance", "connections", "examples"]
          .map(
            (key) =>
              `<article class="detail detail-${key}"><h3>${key}</h3><p>${escapeHtml(
                (lesson as unknown as Record<string, string>)[key],
              )}</p></article>`,
          )
          .join("")
      : `<p class="empty">Knowledge details not loaded.</p>`;
  const chatLog = state.chat
    .map((turn) => {
      const sources = turn.sources.length
        ? `<span class="sources">[${turn.sources.map(escapeHtml).join(", ")}]</span>`
        : "";
      return `<li class="turn ${turn.role}">${escapeHtml(turn.text)} ${sources}</li>`;
    })
    .join("");
  const qa = `
    <ul class="chat-log">${chatLog}</ul>
    <form id="chat-form"><input id="chat-input" placeholder="Ask the tutor" />
    <button type="submit">Ask</button></form>`;
  return [
    section("Brief Summary", summary, "brief-summary"),
    section("Content Type Selection", contentTypePicker, "content-type-selection"),
    section("Knowledge Details", details, "knowledge-details"),
    section("AI Q&A", qa, "ai-qa"),
    section("Retrieved Snippets", renderSnippetPanel(state.chatSnippets.length ? state.chatSnippets : state.lessonSnippets), "retrieved-snippets"),
    section("Learning Feedback", renderFeedbackWidget(state), "learning-feedback"),
  ].join("");
}

function renderQuestion(question: QuizQuestion, result: AnswerResult | undefined): string {
  let controls: string;
  if (question.kind === "multiple_choice") {
    controls = question.options
      .map(
        (option, i) =>
          `<button class="option" data-question="${escapeHtml(question.question_id)}" data-given="${i}">${escapeHtml(option)}</button>`,
      )
      .join("");
  } else {
    controls = `<form class="short-answer" data-question="${escapeHtml(question.question_id)}">
      <input name="given" placeholder="Your answer" /><button type="submit">Submit</button></form>`;
  }
  let verdict = "";
  if (result) {
    const cls = result.record.correct ? "correct" : "incorrect";
    const word = result.record.correct ? "Correct" : "Incorrect";
    verdict = `<p class="verdict ${cls}">${word}. ${escapeHtml(result.explanation)}
      <span class="mastery" data-topic="${escapeHtml(question.topic_id)}">mastery ${result.mastery_after.toFixed(8)}</span>
      <span class="state">${result.state_after}</span></p>`;
  }
  return `<li class="question" data-question-id="${escapeHtml(question.question_id)}">
    <p class="stem">${escapeHtml(question.stem)}</p>${controls}${verdict}</li>`;
}

export function renderPracticeSession(state: ViewState): string {
  if (!state.quiz) {
    return `<p class="empty">Assemble a practice session to begin.</p>
      <button id="start-quiz">Start practice</button>`;
  }
  const byQuestion = new Map(state.answers.map((a) => [a.record.question_id, a]));
  const items = state.quiz.questions
    .map((q) => renderQuestion(q, byQuestion.get(q.question_id)))
    .join("");
  return `<ol class="quiz" data-session="${escapeHtml(state.quiz.session_id)}">${items}</ol>`;
}

export function renderAnswerReview(state: ViewState): string {
  if (!state.review) {
    return `<p class="empty">Finish the session to see the review.</p>`;
  }
  const tallies = Object.entries(state.review.report.per_topic)
    .map(
      ([topic, tally]) =>
        `<li>${escapeHtml(topic)}: ${tally.total - tally.missed}/${tally.total} correct</li>`,
    )
    .join("");
  const rows = state.review.report.items
    .map(
      (item) =>
        `<li class="${item.correct ? "correct" : "incorrect"}">${escapeHtml(item.stem)}
        <em>${item.correct ? "correct" : "incorrect"}</em> ${escapeHtml(item.explanation)}</li>`,
    )
    .join("");
  return `<ul class="tallies">${tallies}</ul><ol class="review-items">${rows}</ol>`;
}

export function renderLearningAdvice(state: ViewState): string {
  if (!state.advice.length) {
    return `<p class="empty">No review advice; nothing was missed.</p>`;
  }
  const rows = state.advice
    .map(
      (entry) =>
        `<li data-topic="${escapeHtml(entry.topic_id)}">${escapeHtml(entry.message)}
        ${entry.snippet_refs.map((ref) => `<code>${escapeHtml(ref)}</code>`).join(" ")}</li>`,
    )
    .join("");
  return `<ul class="advice">${rows}</ul>`;
}

export function renderKnowledgeMapSvg(map: KnowledgeMap): string {
  // Left-to-right layout following the API's topological node order.
  const xStep = 150;
  const y = 70;
  const positions = new Map(map.nodes.map((node, i) => [node.topic_id, 60 + i * xStep]));
  const edges = map.edges
    .map(([from, to]) => {
      const x1 = positions.get(from) ?? 0;
      const x2 = positions.get(to) ?? 0;
      return `<line x1="${x1 + 24}" y1="${y}" x2="${x2 - 24}" y2="${y}" stroke="#666" marker-end="url(#arrow)" />`;
    })
    .join("");
  const nodes = map.nodes
    .map((node) => {
      const x = positions.get(node.topic_id) ?? 0;
      const color = mapStateToColor(node.state);
      return `<g class="map-node" data-topic="${escapeHtml(node.topic_id)}" data-state="${node.state}">
        <circle cx="${x}" cy="${y}" r="22" fill="${color}" />
        <text x="${x}" y="${y + 42}" text-anchor="middle">${escapeHtml(node.label)}</text>
        <title>${escapeHtml(node.label)}: ${node.state}, mastery ${node.mastery.toFixed(8)}</title>
      </g>`;
    })
    .join("");
  const width = 60 + map.nodes.length * xStep;
  return `<svg viewBox="0 0 ${width} 140" class="knowledge-map" role="img">
    <defs><marker id="arrow" markerWidth="8" markerHeight="8" refX="8" refY="4" orient="auto">
    <path d="M0,0 L8,4 L0,8 z" fill="#666"/></marker></defs>${edges}${nodes}</svg>`;
}

export function renderLearningTips(state: ViewState): string {
  if (!state.recommendations.length) {
    return `<p class="empty">No recommendations yet.</p>`;
  }
  const phrase = {
    weak_remediation: "Shore up a weak topic",
    continue_learning: "Keep practicing",
    new_unlocked: "Newly unlocked",
  } as const;
  const rows = state.recommendations
    .map(
      (rec) =>
        `<li data-topic="${escapeHtml(rec.topic_id)}" data-reason="${rec.reason}">
        ${rec.rank}. ${phrase[rec.reason]}: ${escapeHtml(rec.topic_id)}
        (mastery ${rec.mastery.toFixed(8)})</li>`,
    )
    .join("");
  return `<ol class="tips">${rows}</ol>`;
}

export function renderPracticeView(state: ViewState): string {
  return [
    section("Practice Session", renderPracticeSession(state), "practice-session"),
    section("Answer Review", renderAnswerReview(state), "answer-review"),
    section("Learning Advice", renderLearningAdvice(state), "learning-advice"),
    section(
      "Knowledge Map",
      state.map ? renderKnowledgeMapSvg(state.map) : `<p class="empty">Map not loaded.</p>`,
      "knowledge-map-panel",
    ),
    section("Feedback Area", renderFeedbackWidget(state), "feedback-area"),
    section("AI Learning Tips", renderLearningTips(state), "learning-tips"),
  ].join("");
}

export function renderApp(state: ViewState): string {
  const banner = state.banner
    ? `<div class="banner" role="alert">${escapeHtml(state.banner)}</div>`
    : "";
  const view =
    state.mode === "interactive_learning" ? renderTeachingView(state) : renderPracticeView(state);
  return `${renderModeTabs(state)}${banner}<div class="topic-bar">${renderTopicSelect(state)}</div>
    <main class="${state.mode}">${view}</main>`;
}

// Scripted stand-in for the tutoring service, used as the fetch transport
// in tests. Mastery values mirror what the real engine's stub mode returns
// for five consecutive correct answers at default parameters; the UI must
// display them untouched.

import type { MasteryState } from "../src/types.js";

export const CORRECT_RUN: { mastery: number; state: MasteryState }[] = [
  { mastery: 0.5764705882352941, state: "Learning" },
  { mastery: 0.8736842105263158, state: "Mastered" },
  { mastery: 0.9719844357976654, state: "Mastered" },
  { mastery: 0.9942720763723151, state: "Mastered" },
  { mastery: 0.9988492887965479, state: "Mastered" },
];

const TOPICS = [
  { topic_id: "algebra", label: "Algebra" },
  { topic_id: "geometry", label: "Geometry" },
  { topic_id: "calculus", label: "Calculus" },
];

const SNIPPETS = [
  { chunk_id: "doc-a#0", doc_id: "doc-a", text: "Algebra studies equations.", score: 0.71, rank: 1 },
  { chunk_id: "doc-a#1", doc_id: "doc-a", text: "Variables stand for unknowns.", score: 0.5, rank: 2 },
  { chunk_id: "doc-b#0", doc_id: "doc-b", text: "Triangles have three sides.", score: 0.2, rank: 3 },
];

function json(body: unknown, status = 200): Response {
  return new Response(JSON.stringify(body), {
    status,
    headers: { "Content-Type": "application/json" },
  });
}

export class MockBackend {
  requests: { method: string; path: string; body: unknown }[] = [];
  /** Overrides the scripted result for the next graded answer. */
  nextAnswerOverride: { mastery: number; state: MasteryState } | null = null;

  private answered = 0;
  private missed = 0;

  readonly fetchImpl = async (input: string, init?: RequestInit): Promise<Response> => {
    const method = init?.method ?? "GET";
    const url = new URL(input, "http://mock.test");
    const path = url.pathname;
    const body = init?.body ? JSON.parse(String(init.body)) : null;
    this.requests.push({ method, path, body });
    return this.route(method, path, url, body);
  };

  count(method: string, path: string): number {
    return this.requests.filter((r) => r.method === method && r.path === path).length;
  }

  private algebraState(): { state: MasteryState; mastery: number } {
    if (this.answered === 0) {
      return { state: "Untouched", mastery: 0.2 };
    }
    const step = CORRECT_RUN[Math.min(this.answered, CORRECT_RUN.length) - 1];
    return { state: step.state, mastery: step.mastery };
  }

  private route(method: string, path: string, url: URL, body: any): Response {
    if (method === "POST" && path === "/students") {
      return json({ student: { student_id: body.student_id, topics: [] }, request_id: "r" });
    }
    if (method === "GET" && path === "/topics") {
      return json({ topics: TOPICS, request_id: "r" });
    }
    if (method === "POST" && path === "/chat") {
      if (!String(body.question ?? "").trim()) {
        return json({ error: "EmptyQuestion", detail: "empty", request_id: "r" }, 400);
      }
      return json({
        answer: {
          role: "agent",
          text: `Grounded answer about ${body.question}`,
          sources: ["doc-a#0", "doc-a#1"],
          at: "2026-01-01T00:00:00+00:00",
        },
        snippets: SNIPPETS,
        ungrounded: false,
        request_id: "r",
      });
    }
    if (method === "GET" && path === "/lesson") {
      const contentType = url.searchParams.get("content_type") ?? "knowledge_details";
      return json({
        lesson: {
          topic_id: url.searchParams.get("topic_id"),
          content_type: contentType,
          brief_summary: "Short overview.",
          definitions: contentType === "knowledge_details" ? "Definitions text." : "",
          features: contentType === "knowledge_details" ? "Features text." : "",
          importance: contentType === "knowledge_details" ? "Importance text." : "",
          connections: contentType === "knowledge_details" ? "Connections text." : "",
          examples: contentType === "knowledge_details" ? "Examples text." : "",
          sources: ["doc-a#0"],
          ungrounded: false,
          dropped_sources: 0,
        },
        snippets: SNIPPETS,
        request_id: "r",
      });
    }
    if (method === "POST" && path === "/quiz/assemble") {
      return json({
        session: {
          session_id: "quiz-mock",
          student_id: body.student_id,
          topic_id: body.topic_id,
          started_at: "2026-01-01T00:00:00+00:00",
          questions: Array.from({ length: body.n }, (_, i) => ({
            question_id: `q${i}`,
            topic_id: body.topic_id,
            difficulty: "easy",
            kind: "multiple_choice",
            stem: `Question ${i}`,
            options: ["right", "wrong"],
          })),
        },
        request_id: "r",
      });
    }
    if (method === "POST" && path === "/quiz/answer") {
      const correct = body.given === "0";
      if (!correct) {
        this.missed += 1;
      }
      let step = this.nextAnswerOverride ?? CORRECT_RUN[Math.min(this.answered, CORRECT_RUN.length - 1)];
      this.nextAnswerOverride = null;
      this.answered += 1;
      return json({
        record: {
          question_id: body.question_id,
          given: body.given,
          correct,
          graded_at: "2026-01-01T00:00:01+00:00",
        },
        mastery_after: step.mastery,
        state_after: step.state,
        explanation: `Explanation for ${body.question_id}`,
        next_difficulty: "easy",
        request_id: "r",
      });
    }
    if (method === "GET" && path === "/quiz/review") {
      return json({
        report: {
          session_id: url.searchParams.get("session_id"),
          per_topic: { algebra: { total: this.answered, missed: this.missed } },
          items: Array.from({ length: this.answered }, (_, i) => ({
            question_id: `q${i}`,
            stem: `Question ${i}`,
            given: "0",
            correct: true,
            explanation: `Explanation for q${i}`,
          })),
        },
        advice: this.missed
          ? [
              {
                topic_id: "algebra",
                message: `Review Algebra: you missed ${this.missed} of ${this.answered} questions.`,
                snippet_refs: ["doc-a#0", "doc-a#1"],
              },
            ]
          : [],
        request_id: "r",
      });
    }
    if (method === "GET" && /^\/students\/[^/]+\/knowledge-map$/.test(path)) {
      const algebra = this.algebraState();
      return json({
        nodes: [
          { topic_id: "algebra", label: "Algebra", state: algebra.state, mastery: algebra.mastery },
          { topic_id: "calculus", label: "Calculus", state: "Untouched", mastery: 0.2 },
          { topic_id: "geometry", label: "Geometry", state: "Untouched", mastery: 0.2 },
        ],
        edges: [["algebra", "calculus"]],
        request_id: "r",
      });
    }
    if (method === "GET" && /^\/students\/[^/]+\/recommendations$/.test(path)) {
      return json({
        recommendations: [
          { topic_id: "geometry", reason: "new_unlocked", mastery: 0.2, rank: 1 },
        ],
        request_id: "r",
      });
    }
    if (method === "POST" && path === "/feedback") {
      if (typeof body.rating !== "number" || body.rating < 1 || body.rating > 5) {
        return json({ error: "InvalidRating", detail: "bad rating", request_id: "r" }, 400);
      }
      return json({ ordinal: this.count("POST", "/feedback"), request_id: "r" });
    }
    return json({ error: "NotFound", detail: `no route ${method} ${path}`, request_id: "r" }, 404);
  }
}

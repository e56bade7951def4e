// Browser controller: owns the live ViewState, forwards user actions to
// the API client, and re-renders after every response. All displayed
// numbers and states come straight from API payloads. The action methods
// are public so they can be driven headlessly; bind() wires DOM events
// to them in the browser.

import { ApiClient, ApiRequestError } from "./api.js";
import { renderApp } from "./render.js";
import {
  initialState,
  selectTopic,
  switchMode,
  withAnswer,
  withBanner,
  withChatExchange,
  withFeedbackSubmitted,
  withLesson,
  withMap,
  withQuiz,
  withRecommendations,
  withReview,
  type Mode,
  type ViewState,
} from "./state.js";

const QUIZ_LENGTH = 5;

/** The minimal element surface the controller needs; a real HTMLElement
 * satisfies it, and tests can pass a plain object. */
export interface RootElement {
  innerHTML: string;
  addEventListener(type: string, listener: (event: Event) => void): void;
}

export class App {
  private state: ViewState;

  constructor(
    private readonly root: RootElement,
    private readonly api: ApiClient,
    studentId: string,
  ) {
    this.state = initialState(studentId);
  }

  view(): ViewState {
    return this.state;
  }

  async start(): Promise<void> {
    try {
      await this.api.createStudent(this.state.studentId);
    } catch (error) {
      if (!(error instanceof ApiRequestError && error.status === 409)) {
        this.fail(error);
      }
    }
    try {
      this.state = { ...this.state, topics: await this.api.topics() };
    } catch (error) {
      this.fail(error);
    }
    this.paint();
  }

  private paint(): void {
    this.root.innerHTML = renderApp(this.state);
  }

  private update(state: ViewState): void {
    this.state = state;
    this.paint();
  }

  private fail(error: unknown): void {
    const message =
      error instanceof ApiRequestError ? error.message : `unexpected error: ${String(error)}`;
    this.update(withBanner(this.state, message));
  }

  private async refreshProgress(): Promise<void> {
    const [map, recs] = await Promise.all([
      this.api.knowledgeMap(this.state.studentId),
      this.api.recommendations(this.state.studentId, 3),
    ]);
    this.update(withRecommendations(withMap(this.state, map), recs));
  }

  chooseTopic(topicId: string): void {
    this.update(selectTopic(this.state, topicId));
  }

  async switchModeTo(mode: Mode): Promise<void> {
    this.update(switchMode(this.state, mode));
    if (mode === "track_my_progress") {
      try {
        await this.refreshProgress();
      } catch (error) {
        this.fail(error);
      }
    }
  }

  async requestLesson(contentType: "brief_summary" | "knowledge_details"): Promise<void> {
    if (!this.state.selectedTopic) {
      this.update(withBanner(this.state, "Select a topic first."));
      return;
    }
    try {
      const response = await this.api.lesson(
        this.state.studentId,
        this.state.selectedTopic,
        contentType,
      );
      this.update(withLesson(this.state, response.lesson, response.snippets));
    } catch (error) {
      this.fail(error);
    }
  }

  async ask(question: string): Promise<void> {
    try {
      const response = await this.api.chat(this.state.studentId, question);
      this.update(withChatExchange(this.state, question, response.answer, response.snippets));
    } catch (error) {
      this.fail(error);
    }
  }

  async startQuiz(): Promise<void> {
    if (!this.state.selectedTopic) {
      this.update(withBanner(this.state, "Select a topic first."));
      return;
    }
    try {
      const session = await this.api.assembleQuiz(
        this.state.studentId,
        this.state.selectedTopic,
        QUIZ_LENGTH,
      );
      this.update(withQuiz(this.state, session));
    } catch (error) {
      this.fail(error);
    }
  }

  async submitAnswer(questionId: string, given: string): Promise<void> {
    const quiz = this.state.quiz;
    if (!quiz || this.state.answers.some((a) => a.record.question_id === questionId)) {
      return;
    }
    try {
      const result = await this.api.answerQuestion(
        this.state.studentId,
        quiz.session_id,
        questionId,
        given,
      );
      this.update(withAnswer(this.state, result));
      if (this.state.answers.length === quiz.questions.length) {
        const review = await this.api.review(this.state.studentId, quiz.session_id);
        this.update(withReview(this.state, review));
        await this.refreshProgress();
      }
    } catch (error) {
      this.fail(error);
    }
  }

  async submitFeedback(rating: number): Promise<void> {
    const pending = this.state.pendingFeedback;
    if (!pending || pending.submitted || rating < 1 || rating > 5) {
      return;
    }
    try {
      await this.api.sendFeedback(this.state.studentId, pending.level, pending.itemId, rating);
      this.update(withFeedbackSubmitted(this.state));
    } catch (error) {
      this.fail(error);
    }
  }

  bind(): void {
    this.root.addEventListener("click", (event) => {
      const target = event.target as HTMLElement;
      if (target.dataset.mode) {
        void this.switchModeTo(target.dataset.mode as Mode);
      } else if (target.dataset.contentType) {
        void this.requestLesson(target.dataset.contentType as "brief_summary" | "knowledge_details");
      } else if (target.id === "start-quiz") {
        void this.startQuiz();
      } else if (target.classList.contains("option")) {
        void this.submitAnswer(target.dataset.question ?? "", target.dataset.given ?? "");
      } else if (target.classList.contains("rate") && !target.hasAttribute("disabled")) {
        void this.submitFeedback(Number(target.dataset.rating ?? "0"));
      }
    });
    this.root.addEventListener("submit", (event) => {
      const form = event.target as HTMLFormElement;
      event.preventDefault();
      if (form.id === "chat-form") {
        const input = form.querySelector<HTMLInputElement>("#chat-input");
        if (input && input.value.trim()) {
          void this.ask(input.value);
        }
      } else if (form.classList.contains("short-answer")) {
        const given = new FormData(form).get("given");
        if (typeof given === "string" && given.trim()) {
          void this.submitAnswer(form.dataset.question ?? "", given);
        }
      }
    });
    this.root.addEventListener("change", (event) => {
      const select = event.target as HTMLSelectElement;
      if (select.id === "topic-select" && select.value) {
        this.chooseTopic(select.value);
      }
    });
  }
}

declare global {
  interface Window {
    EXPERTAGENT_API_BASE?: string;
  }
}

export function boot(): void {
  const root = document.getElementById("app");
  if (!root) {
    throw new Error("missing #app element");
  }
  const base = window.EXPERTAGENT_API_BASE ?? "";
  const studentId = new URLSearchParams(window.location.search).get("student") ?? "demo";
  const app = new App(root, new ApiClient(base), studentId);
  app.bind();
  void app.start();
}

if (typeof document !== "undefined" && document.getElementById("app")) {
  boot();
}

import type {
  AnswerResult,
  ChatResponse,
  KnowledgeMap,
  LessonResponse,
  QuizSession,
  Recommendation,
  ReviewResponse,
  TopicRef,
} from "./types.js";

export type FetchLike = (input: string, init?: RequestInit) => Promise<Response>;

export class ApiRequestError extends Error {
  constructor(
    public readonly status: number,
    public readonly errorType: string,
    detail: string,
  ) {
    super(`${errorType}: ${detail}`);
  }
}

/** Thin typed client over the tutoring service's JSON endpoints. */
export class ApiClient {
  constructor(
    private readonly baseUrl: string = "",
    private readonly fetchImpl: FetchLike = (input, init) => fetch(input, init),
  ) {}

  private async request<T>(path: string, init?: RequestInit): Promise<T> {
    const response = await this.fetchImpl(this.baseUrl + path, init);
    const body = await response.json();
    if (!response.ok) {
      throw new ApiRequestError(response.status, body.error ?? "Unknown", body.detail ?? "");
    }
    return body as T;
  }

  private post<T>(path: string, payload: unknown): Promise<T> {
    return this.request<T>(path, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(payload),
    });
  }

  async topics(): Promise<TopicRef[]> {
    const body = await this.request<{ topics: TopicRef[] }>("/topics");
    return body.topics;
  }

  createStudent(studentId: string): Promise<unknown> {
    return this.post("/students", { student_id: studentId });
  }

  chat(studentId: string, question: string): Promise<ChatResponse> {
    return this.post("/chat", { student_id: studentId, question });
  }

  lesson(
    studentId: string,
    topicId: string,
    contentType: "brief_summary" | "knowledge_details",
  ): Promise<LessonResponse> {
    const query = new URLSearchParams({
      student_id: studentId,
      topic_id: topicId,
      content_type: contentType,
    });
    return this.request<LessonResponse>(`/lesson?${query}`);
  }

  async assembleQuiz(studentId: string, topicId: string, n: number): Promise<QuizSession> {
    const body = await this.post<{ session: QuizSession }>("/quiz/assemble", {
      student_id: studentId,
      topic_id: topicId,
      n,
    });
    return body.session;
  }

  answerQuestion(
    studentId: string,
    sessionId: string,
    questionId: string,
    given: string,
  ): Promise<AnswerResult> {
    return this.post("/quiz/answer", {
      student_id: studentId,
      session_id: sessionId,
      question_id: questionId,
      given,
    });
  }

  review(studentId: string, sessionId: string): Promise<ReviewResponse> {
    const query = new URLSearchParams({ student_id: studentId, session_id: sessionId });
    return this.request<ReviewResponse>(`/quiz/review?${query}`);
  }

  knowledgeMap(studentId: string): Promise<KnowledgeMap> {
    return this.request<KnowledgeMap>(`/students/${encodeURIComponent(studentId)}/knowledge-map`);
  }

  async recommendations(studentId: string, n: number): Promise<Recommendation[]> {
    const body = await this.request<{ recommendations: Recommendation[] }>(
      `/students/${encodeURIComponent(studentId)}/recommendations?n=${n}`,
    );
    return body.recommendations;
  }

  sendFeedback(
    studentId: string,
    level: "chat" | "teaching" | "quiz",
    itemId: string,
    rating: number,
    comment?: string,
  ): Promise<{ ordinal: number }> {
    return this.post("/feedback", {
      student_id: studentId,
      level,
      item_id: itemId,
      rating,
      comment: comment ?? null,
    });
  }
}

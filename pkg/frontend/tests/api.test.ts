import { beforeEach, describe, expect, it } from "vitest";

import { ApiClient, ApiRequestError } from "../src/api.js";
import { MockBackend } from "./mockBackend.js";

let backend: MockBackend;
let api: ApiClient;

beforeEach(() => {
  backend = new MockBackend();
  api = new ApiClient("", backend.fetchImpl);
});

describe("api client", () => {
  it("lists topics", async () => {
    const topics = await api.topics();
    expect(topics.map((t) => t.topic_id)).toEqual(["algebra", "geometry", "calculus"]);
    expect(backend.count("GET", "/topics")).toBe(1);
  });

  it("posts chat questions with the student id", async () => {
    await api.chat("s1", "What is algebra?");
    const request = backend.requests.at(-1)!;
    expect(request).toMatchObject({
      method: "POST",
      path: "/chat",
      body: { student_id: "s1", question: "What is algebra?" },
    });
  });

  it("surfaces engine errors with status and type", async () => {
    await expect(api.chat("s1", "   ")).rejects.toThrowError(ApiRequestError);
    try {
      await api.chat("s1", "   ");
    } catch (error) {
      const apiError = error as ApiRequestError;
      expect(apiError.status).toBe(400);
      expect(apiError.errorType).toBe("EmptyQuestion");
    }
  });

  it("encodes lesson query parameters", async () => {
    await api.lesson("s one", "algebra", "knowledge_details");
    const request = backend.requests.at(-1)!;
    expect(request.path).toBe("/lesson");
    expect(request.method).toBe("GET");
  });

  it("posts exactly one request per graded answer", async () => {
    const session = await api.assembleQuiz("s1", "algebra", 3);
    for (const question of session.questions) {
      await api.answerQuestion("s1", session.session_id, question.question_id, "0");
    }
    expect(backend.count("POST", "/quiz/answer")).toBe(3);
  });

  it("sends feedback payloads", async () => {
    await api.sendFeedback("s1", "teaching", "algebra", 5, "clear");
    const request = backend.requests.at(-1)!;
    expect(request.body).toEqual({
      student_id: "s1",
      level: "teaching",
      item_id: "algebra",
      rating: 5,
      comment: "clear",
    });
  });
});

import type {
  AdviceEntry,
  AnswerResult,
  ChatTurn,
  KnowledgeMap,
  Lesson,
  QuizSession,
  Recommendation,
  ReviewResponse,
  Snippet,
  TopicRef,
} from "./types.js";

export type Mode = "interactive_learning" | "track_my_progress";

export interface PendingFeedback {
  level: "chat" | "teaching" | "quiz";
  itemId: string;
  submitted: boolean;
}

/** Everything the screens render. The quiz view may only be populated in
 * track_my_progress mode and the lesson only in interactive_learning;
 * switching modes clears the other side's panels. */
export interface ViewState {
  studentId: string;
  mode: Mode;
  topics: TopicRef[];
  selectedTopic: string | null;
  lesson: Lesson | null;
  lessonSnippets: Snippet[];
  chat: ChatTurn[];
  chatSnippets: Snippet[];
  quiz: QuizSession | null;
  answers: AnswerResult[];
  review: ReviewResponse | null;
  advice: AdviceEntry[];
  map: KnowledgeMap | null;
  recommendations: Recommendation[];
  pendingFeedback: PendingFeedback | null;
  banner: string | null;
}

export function initialState(studentId: string): ViewState {
  return {
    studentId,
    mode: "interactive_learning",
    topics: [],
    selectedTopic: null,
    lesson: null,
    lessonSnippets: [],
    chat: [],
    chatSnippets: [],
    quiz: null,
    answers: [],
    review: null,
    advice: [],
    map: null,
    recommendations: [],
    pendingFeedback: null,
    banner: null,
  };
}

export function switchMode(state: ViewState, mode: Mode): ViewState {
  if (mode === state.mode) {
    return state;
  }
  const next: ViewState = { ...state, mode, banner: null };
  if (mode === "interactive_learning") {
    next.quiz = null;
    next.answers = [];
    next.review = null;
    next.advice = [];
  } else {
    next.lesson = null;
    next.lessonSnippets = [];
  }
  return next;
}

export function selectTopic(state: ViewState, topicId: string): ViewState {
  return { ...state, selectedTopic: topicId, lesson: null, lessonSnippets: [] };
}

export function withLesson(state: ViewState, lesson: Lesson, snippets: Snippet[]): ViewState {
  if (state.mode !== "interactive_learning") {
    throw new Error("lesson view is only available in interactive_learning mode");
  }
  return {
    ...state,
    lesson,
    lessonSnippets: snippets,
    pendingFeedback: { level: "teaching", itemId: lesson.topic_id, submitted: false },
  };
}

export function withChatExchange(
  state: ViewState,
  question: string,
  answer: ChatTurn,
  snippets: Snippet[],
): ViewState {
  const studentTurn: ChatTurn = { role: "student", text: question, sources: [], at: null };
  return {
    ...state,
    chat: [...state.chat, studentTurn, answer],
    chatSnippets: snippets,
  };
}

export function withQuiz(state: ViewState, quiz: QuizSession): ViewState {
  if (state.mode !== "track_my_progress") {
    throw new Error("quiz view is only available in track_my_progress mode");
  }
  return {
    ...state,
    quiz,
    answers: [],
    review: null,
    advice: [],
    pendingFeedback: { level: "quiz", itemId: quiz.session_id, submitted: false },
  };
}

export function withAnswer(state: ViewState, result: AnswerResult): ViewState {
  return { ...state, answers: [...state.answers, result] };
}

export function withReview(state: ViewState, review: ReviewResponse): ViewState {
  return { ...state, review, advice: review.advice };
}

export function withMap(state: ViewState, map: KnowledgeMap): ViewState {
  return { ...state, map };
}

export function withRecommendations(state: ViewState, recs: Recommendation[]): ViewState {
  return { ...state, recommendations: recs };
}

export function withBanner(state: ViewState, message: string): ViewState {
  return { ...state, banner: message };
}

export function withFeedbackSubmitted(state: ViewState): ViewState {
  if (!state.pendingFeedback) {
    return state;
  }
  return { ...state, pendingFeedback: { ...state.pendingFeedback, submitted: true } };
}

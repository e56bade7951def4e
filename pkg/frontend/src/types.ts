// Payload shapes of the tutoring service's JSON API. The UI renders these
// values as received; it never derives mastery, grades, or rankings itself.

export type MasteryState = "Untouched" | "Learning" | "Mastered" | "Weak";

export interface TopicRef {
  topic_id: string;
  label: string;
}

export interface Snippet {
  chunk_id: string;
  doc_id: string;
  text: string;
  score: number;
  rank: number;
}

export interface ChatTurn {
  role: "student" | "agent";
  text: string;
  sources: string[];
  at: string | null;
}

export interface ChatResponse {
  answer: ChatTurn;
  snippets: Snippet[];
  ungrounded: boolean;
  request_id: string;
}

export interface Lesson {
  topic_id: string;
  content_type: "brief_summary" | "knowledge_details";
  brief_summary: string;
  definitions: string;
  features: string;
  importance: string;
  connections: string;
  examples: string;
  sources: string[];
  ungrounded: boolean;
  dropped_sources: number;
}

export interface LessonResponse {
  lesson: Lesson;
  snippets: Snippet[];
  request_id: string;
}

export interface QuizQuestion {
  question_id: string;
  topic_id: string;
  difficulty: "easy" | "medium" | "hard";
  kind: "multiple_choice" | "short_answer";
  stem: string;
  options: string[];
}

export interface QuizSession {
  session_id: string;
  student_id: string;
  topic_id: string;
  started_at: string;
  questions: QuizQuestion[];
}

export interface AnswerResult {
  record: {
    question_id: string;
    given: string;
    correct: boolean;
    graded_at: string;
  };
  mastery_after: number;
  state_after: MasteryState;
  explanation: string;
  next_difficulty: "easy" | "medium" | "hard";
  request_id: string;
}

export interface ReviewItem {
  question_id: string;
  stem: string;
  given: string;
  correct: boolean;
  explanation: string;
}

export interface AdviceEntry {
  topic_id: string;
  message: string;
  snippet_refs: string[];
}

export interface ReviewResponse {
  report: {
    session_id: string;
    per_topic: Record<string, { total: number; missed: number }>;
    items: ReviewItem[];
  };
  advice: AdviceEntry[];
  request_id: string;
}

export interface MapNode {
  topic_id: string;
  label: string;
  state: MasteryState;
  mastery: number;
}

export interface KnowledgeMap {
  nodes: MapNode[];
  edges: [string, string][];
  request_id: string;
}

export interface Recommendation {
  topic_id: string;
  reason: "weak_remediation" | "continue_learning" | "new_unlocked";
  mastery: number;
  rank: number;
}

export interface ApiError {
  error: string;
  detail: string;
  request_id: string;
}

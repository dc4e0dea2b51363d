/**
 * Console view state and pure transitions.
 *
 * The view is rendered exclusively from service payloads; every transition
 * here folds a payload (or a transport failure) into the previous state.
 * A page reload rebuilds the same view from GET /sessions/{id}.
 */

import type {
  ActionPayload,
  CreatedPayload,
  HypothesisPanel,
  SessionPayload,
} from './api.js';

export interface ChatBubble {
  role: 'patient' | 'system';
  text: string;
}

export type SessionStatus =
  | 'idle'
  | 'active'
  | 'diagnosed'
  | 'turn_limit_failure'
  | 'error';

export interface SessionView {
  sessionId: string | null;
  status: SessionStatus;
  turn: number;
  maxTurns: number;
  bubbles: ChatBubble[];
  hypotheses: HypothesisPanel | null;
  showHypotheses: boolean;
  diagnoses: string[] | null;
  ratingsSubmitted: boolean;
  pendingError: string | null;
  draft: string;
}

export function initialView(maxTurns = 50): SessionView {
  return {
    sessionId: null,
    status: 'idle',
    turn: 0,
    maxTurns,
    bubbles: [],
    hypotheses: null,
    showHypotheses: false,
    diagnoses: null,
    ratingsSubmitted: false,
    pendingError: null,
    draft: '',
  };
}

function foldAction(view: SessionView, action: ActionPayload): SessionView {
  const bubbles = [...view.bubbles];
  if (action.kind === 'question' && action.question) {
    bubbles.push({ role: 'system', text: action.question });
  }
  const diagnoses = action.kind === 'diagnosis' ? (action.diagnoses ?? []) : view.diagnoses;
  if (action.kind === 'diagnosis') {
    bubbles.push({
      role: 'system',
      text: `The most likely diagnoses are: ${(action.diagnoses ?? []).join(', ')}.`,
    });
  }
  return {
    ...view,
    status: action.status as SessionStatus,
    turn: action.turn,
    bubbles,
    hypotheses: action.hypotheses ?? view.hypotheses,
    diagnoses,
    pendingError: null,
  };
}

export function applyCreated(
  view: SessionView,
  created: CreatedPayload,
  showHypotheses: boolean,
  maxTurns: number,
): SessionView {
  let next: SessionView = {
    ...initialView(maxTurns),
    sessionId: created.session_id,
    status: created.status as SessionStatus,
    turn: created.turn,
    showHypotheses,
  };
  if (created.greeting) {
    next = { ...next, bubbles: [{ role: 'system', text: created.greeting }] };
  }
  if (created.opening) {
    next = { ...next, bubbles: [...next.bubbles, { role: 'patient', text: created.opening }] };
  }
  if (created.action) {
    next = foldAction(next, created.action);
  }
  return next;
}

/** The user's answer went out; show it and clear the draft. */
export function applyUserMessage(view: SessionView, text: string): SessionView {
  return {
    ...view,
    bubbles: [...view.bubbles, { role: 'patient', text }],
    draft: '',
    pendingError: null,
  };
}

export function applyAction(view: SessionView, action: ActionPayload): SessionView {
  return foldAction(view, action);
}

/**
 * Transport failure: surface a retry banner and put the unsent answer back
 * in the draft so nothing the user typed is lost.
 */
export function applyFailure(view: SessionView, draft: string, message: string): SessionView {
  const bubbles = view.bubbles.slice();
  if (bubbles.length && bubbles[bubbles.length - 1]?.text === draft) {
    bubbles.pop(); // the optimistic bubble never reached the service
  }
  return { ...view, bubbles, draft, pendingError: message };
}

export function applyRatingsSubmitted(view: SessionView): SessionView {
  return { ...view, ratingsSubmitted: true };
}

/** Rebuild the whole view from the session payload (page reload path). */
export function viewFromSession(
  payload: SessionPayload,
  previous?: SessionView,
): SessionView {
  const bubbles: ChatBubble[] = payload.history.map(([role, text]) => ({
    role: role === 'patient' ? 'patient' : 'system',
    text,
  }));
  const lastSystem = [...payload.history].reverse().find(([role]) => role === 'system');
  let diagnoses: string[] | null = null;
  if (payload.status === 'diagnosed' && lastSystem) {
    const match = lastSystem[1].match(/^The most likely diagnoses are: (.*)\.$/);
    if (match && match[1] !== undefined) {
      diagnoses = match[1].split(',').map((name) => name.trim());
    }
  }
  return {
    sessionId: payload.session_id,
    status: payload.status as SessionStatus,
    turn: payload.turn,
    maxTurns: payload.max_turns,
    bubbles,
    hypotheses: previous?.hypotheses ?? null,
    showHypotheses: payload.show_hypotheses,
    diagnoses,
    ratingsSubmitted: payload.ratings !== null,
    pendingError: null,
    draft: previous?.draft ?? '',
  };
}

export function isTerminal(view: SessionView): boolean {
  return (
    view.status === 'diagnosed' ||
    view.status === 'turn_limit_failure' ||
    view.status === 'error'
  );
}

/** Turn counter against the cap, e.g. "3 / 50". */
export function turnLabel(view: SessionView): string {
  return `${view.turn} / ${view.maxTurns}`;
}

export function statusBanner(view: SessionView): string {
  switch (view.status) {
    case 'idle':
      return 'Not connected';
    case 'active':
      return 'Session in progress';
    case 'diagnosed':
      return 'Final diagnosis reached';
    case 'turn_limit_failure':
      return 'Turn limit reached without a diagnosis';
    case 'error':
      return 'Session ended with an error';
  }
}

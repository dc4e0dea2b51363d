/**
 * DOM rendering and event wiring. Free-text answers only: the whole point
 * of the console is that the patient side is unconstrained prose, so there
 * are no yes/no buttons anywhere.
 */

import {
  createSession,
  getSession,
  postMessage,
  submitRatings,
  type ServiceConfig,
} from './api.js';
import { downloadTranscript, exportEnabled, exportTranscript } from './export.js';
import {
  emptyRatingDraft,
  RATING_DIMENSIONS,
  toRatingSet,
  validateRatings,
  type RatingDraft,
} from './ratings.js';
import {
  applyAction,
  applyCreated,
  applyFailure,
  applyRatingsSubmitted,
  applyUserMessage,
  initialView,
  isTerminal,
  statusBanner,
  turnLabel,
  viewFromSession,
  type SessionView,
} from './state.js';

interface ConsoleState {
  cfg: ServiceConfig;
  view: SessionView;
  ratingDraft: RatingDraft;
  busy: boolean;
}

const state: ConsoleState = {
  cfg: { baseUrl: 'http://127.0.0.1:8234' },
  view: initialView(),
  ratingDraft: emptyRatingDraft(),
  busy: false,
};

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) throw new Error(`missing element #${id}`);
  return node as T;
}

function render(): void {
  const view = state.view;
  el('status-banner').textContent = statusBanner(view);
  el('turn-counter').textContent = `Turn ${turnLabel(view)}`;

  const timeline = el('timeline');
  timeline.replaceChildren();
  for (const bubble of view.bubbles) {
    const div = document.createElement('div');
    div.className = `bubble ${bubble.role}`;
    div.textContent = bubble.text;
    timeline.appendChild(div);
  }
  timeline.scrollTop = timeline.scrollHeight;

  const banner = el('retry-banner');
  banner.hidden = view.pendingError === null;
  if (view.pendingError !== null) {
    el('retry-message').textContent = `Could not reach the service: ${view.pendingError}`;
  }

  const input = el<HTMLTextAreaElement>('answer-input');
  if (input.value !== view.draft) input.value = view.draft;
  const canAnswer = view.status === 'active' && !state.busy;
  input.disabled = !canAnswer;
  el<HTMLButtonElement>('send-button').disabled = !canAnswer;

  const panel = el('hypothesis-panel');
  panel.hidden = !view.showHypotheses;
  if (view.showHypotheses && view.hypotheses) {
    const list = el('hypothesis-list');
    list.replaceChildren();
    for (const disease of view.hypotheses.diseases) {
      const row = document.createElement('li');
      row.textContent = `${disease.name} — ${disease.score.toFixed(4)}`;
      list.appendChild(row);
    }
    const chips = el('shared-chips');
    chips.replaceChildren();
    for (const attribute of view.hypotheses.shared_attributes) {
      const chip = document.createElement('span');
      chip.className = 'chip';
      chip.textContent = attribute;
      chips.appendChild(chip);
    }
  }

  const card = el('diagnosis-card');
  card.hidden = view.diagnoses === null;
  if (view.diagnoses !== null) {
    const list = el('diagnosis-list');
    list.replaceChildren();
    view.diagnoses.forEach((name, index) => {
      const row = document.createElement('li');
      row.textContent = `${index + 1}. ${name}`;
      list.appendChild(row);
    });
  }

  el('rating-form').hidden = !isTerminal(view) || view.ratingsSubmitted;
  el('rating-thanks').hidden = !view.ratingsSubmitted;
  el<HTMLButtonElement>('export-button').disabled = !exportEnabled(view);
}

async function connect(): Promise<void> {
  state.cfg = {
    baseUrl: el<HTMLInputElement>('base-url').value.replace(/\/$/, ''),
    apiToken: el<HTMLInputElement>('api-token').value || undefined,
  };
  const profileId = el<HTMLInputElement>('profile-id').value.trim();
  const showHypotheses = el<HTMLInputElement>('show-hypotheses').checked;
  state.busy = true;
  try {
    const created = await createSession(state.cfg, {
      profile_id: profileId || undefined,
      show_hypotheses: showHypotheses,
    });
    const session = await getSession(state.cfg, created.session_id);
    state.view = applyCreated(state.view, created, showHypotheses, session.max_turns);
    state.ratingDraft = emptyRatingDraft();
  } catch (error) {
    state.view = { ...state.view, pendingError: String(error) };
  } finally {
    state.busy = false;
    render();
  }
}

async function send(): Promise<void> {
  const input = el<HTMLTextAreaElement>('answer-input');
  const text = input.value.trim();
  const sessionId = state.view.sessionId;
  if (!text || sessionId === null) return;
  state.busy = true;
  state.view = applyUserMessage(state.view, text);
  render();
  try {
    const action = await postMessage(state.cfg, sessionId, text);
    state.view = applyAction(state.view, action);
  } catch (error) {
    state.view = applyFailure(state.view, text, String(error));
  } finally {
    state.busy = false;
    render();
  }
}

async function reloadView(): Promise<void> {
  if (state.view.sessionId === null) return;
  const payload = await getSession(state.cfg, state.view.sessionId);
  state.view = viewFromSession(payload, state.view);
  render();
}

async function sendRatings(): Promise<void> {
  const draft = state.ratingDraft;
  for (const dimension of RATING_DIMENSIONS) {
    const raw = el<HTMLSelectElement>(`rating-${dimension}`).value;
    draft[dimension] = raw === '' ? null : Number(raw);
  }
  draft.comments = el<HTMLTextAreaElement>('rating-comments').value;
  const errors = validateRatings(draft);
  const errorBox = el('rating-errors');
  errorBox.textContent = errors.join('; ');
  if (errors.length > 0 || state.view.sessionId === null) return;
  await submitRatings(state.cfg, state.view.sessionId, toRatingSet(draft));
  state.view = applyRatingsSubmitted(state.view);
  render();
}

async function exportNow(): Promise<void> {
  if (state.view.sessionId === null) return;
  const raw = await exportTranscript(state.cfg, state.view);
  downloadTranscript(raw, state.view.sessionId);
}

export function bootstrap(): void {
  el('connect-button').addEventListener('click', () => void connect());
  el('send-button').addEventListener('click', () => void send());
  el<HTMLTextAreaElement>('answer-input').addEventListener('input', (event) => {
    state.view = { ...state.view, draft: (event.target as HTMLTextAreaElement).value };
  });
  el('retry-button').addEventListener('click', () => void send());
  el('reload-button').addEventListener('click', () => void reloadView());
  el('rating-submit').addEventListener('click', () => void sendRatings());
  el('export-button').addEventListener('click', () => void exportNow());
  render();
}

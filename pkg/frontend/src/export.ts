/**
 * Transcript export: download exactly the bytes the service serves.
 */

import { fetchTranscriptRaw, type ServiceConfig } from './api.js';
import { isTerminal, type SessionView } from './state.js';

export function exportEnabled(view: SessionView): boolean {
  return view.sessionId !== null && isTerminal(view);
}

/** Raw transcript text for the current session; refuses while active. */
export async function exportTranscript(
  cfg: ServiceConfig,
  view: SessionView,
): Promise<string> {
  if (!exportEnabled(view) || view.sessionId === null) {
    throw new Error('transcript export is available only after the session ends');
  }
  return await fetchTranscriptRaw(cfg, view.sessionId);
}

/** Trigger a browser download of the raw transcript text. */
export function downloadTranscript(raw: string, sessionId: string): void {
  const blob = new Blob([raw], { type: 'application/json' });
  const url = URL.createObjectURL(blob);
  const anchor = document.createElement('a');
  anchor.href = url;
  anchor.download = `transcript-${sessionId}.json`;
  anchor.click();
  URL.revokeObjectURL(url);
}

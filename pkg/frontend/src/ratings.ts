/**
 * The three 5-point rating scales collected after a session ends.
 */

import type { RatingSet } from './api.js';

export const RATING_DIMENSIONS = ['essentiality', 'flow', 'authenticity'] as const;
export type RatingDimension = (typeof RATING_DIMENSIONS)[number];

export interface RatingDraft {
  essentiality: number | null;
  flow: number | null;
  authenticity: number | null;
  comments: string;
}

export function emptyRatingDraft(): RatingDraft {
  return { essentiality: null, flow: null, authenticity: null, comments: '' };
}

/** Human-visible validation errors; empty means the draft is submittable. */
export function validateRatings(draft: RatingDraft): string[] {
  const errors: string[] = [];
  for (const dimension of RATING_DIMENSIONS) {
    const value = draft[dimension];
    if (value === null || !Number.isInteger(value) || value < 1 || value > 5) {
      errors.push(`${dimension} must be a whole number from 1 to 5`);
    }
  }
  return errors;
}

export function toRatingSet(draft: RatingDraft): RatingSet {
  const errors = validateRatings(draft);
  if (errors.length > 0) {
    throw new Error(errors.join('; '));
  }
  return {
    essentiality: draft.essentiality as number,
    flow: draft.flow as number,
    authenticity: draft.authenticity as number,
    comments: draft.comments,
  };
}

/**
 * Strength-slider mapping: position 0 means sigma 0 ("disabled"); the rest
 * of the track is log-scaled over [1/4, 4] so sigma = 1 sits at the center.
 */

export const SIGMA_MAX = 4;
export const SLIDER_STEPS = 200;

export function sliderToSigma(position: number): number {
  const p = Math.min(Math.max(position, 0), 1);
  if (p === 0) return 0;
  return Math.pow(SIGMA_MAX, 2 * p - 1);
}

export function sigmaToSlider(sigma: number): number {
  if (sigma <= 0) return 0;
  const clamped = Math.min(Math.max(sigma, 1 / SIGMA_MAX), SIGMA_MAX);
  return (Math.log(clamped) / Math.log(SIGMA_MAX) + 1) / 2;
}

export function sigmaLabel(sigma: number): string {
  if (sigma === 0) return "disabled";
  if (Math.abs(sigma - 1) < 1e-9) return "1.00 (neutral)";
  return sigma.toFixed(2);
}

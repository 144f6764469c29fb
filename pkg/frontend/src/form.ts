import type { SessionConfig } from "./types.js";

export interface TestForm {
  nA: number;
  nB: number;
  alpha: number;
  gamma: number;
  restricted: boolean;
  divergence: "difference" | "log_odds_ratio";
  delta: number | null;
  controlRate: number | null;
  gridPrecision: number;
}

export const DEFAULT_FORM: TestForm = {
  nA: 1,
  nB: 1,
  alpha: 0.05,
  gamma: 0.18,
  restricted: false,
  divergence: "difference",
  delta: null,
  controlRate: null,
  gridPrecision: 0.001,
};

/** Values of the stopped stillbirth trial: known control event rate and
 * minimal clinically relevant difference. */
export function applySwepisPreset(form: TestForm): TestForm {
  return {
    ...form,
    nA: 1,
    nB: 1,
    restricted: true,
    divergence: "difference",
    delta: 0.00318,
    controlRate: 0.0001,
  };
}

/** Client-side validation; a non-empty result blocks the request. */
export function validateForm(form: TestForm): Record<string, string> {
  const errors: Record<string, string> = {};
  if (!Number.isInteger(form.nA) || form.nA < 1) {
    errors.nA = "block size must be a positive integer";
  }
  if (!Number.isInteger(form.nB) || form.nB < 1) {
    errors.nB = "block size must be a positive integer";
  }
  if (!(form.alpha > 0 && form.alpha <= 1)) {
    errors.alpha = "alpha must lie in (0, 1]";
  }
  if (!(form.gamma > 0)) {
    errors.gamma = "prior parameter must be positive";
  }
  if (form.restricted) {
    if (form.delta === null || !Number.isFinite(form.delta)) {
      errors.delta = "a restricted test needs an effect size";
    } else if (form.delta === 0) {
      errors.delta = "effect size must be nonzero";
    }
    if (
      form.controlRate !== null &&
      !(form.controlRate >= 0 && form.controlRate <= 1)
    ) {
      errors.controlRate = "control rate must lie in [0, 1]";
    }
    if (!(form.gridPrecision > 0 && form.gridPrecision < 1)) {
      errors.gridPrecision = "grid precision must lie in (0, 1)";
    }
  }
  return errors;
}

export function toSessionConfig(form: TestForm): SessionConfig {
  if (!form.restricted) {
    return {
      n_a: form.nA,
      n_b: form.nB,
      alpha: form.alpha,
      model: { type: "beta", gamma: form.gamma },
    };
  }
  const model: SessionConfig["model"] = {
    type: "restricted",
    divergence: form.divergence,
    delta: form.delta ?? 0,
    grid_precision: form.gridPrecision,
    alpha: form.gamma,
    beta: form.gamma,
  };
  if (form.controlRate !== null) {
    model.control_rate = form.controlRate;
  }
  return { n_a: form.nA, n_b: form.nB, alpha: form.alpha, model };
}

export type Group = "a" | "b";

export type SessionStatus = "running" | "stopped-rejected" | "stopped-manual";

export interface BetaModelConfig {
  type: "beta";
  gamma?: number;
  alpha_a?: number;
  beta_a?: number;
  alpha_b?: number;
  beta_b?: number;
}

export interface PointModelConfig {
  type: "point";
  theta_a: number;
  theta_b: number;
}

export interface RestrictedModelConfig {
  type: "restricted";
  divergence: "difference" | "log_odds_ratio";
  delta: number;
  grid_precision?: number;
  alpha?: number;
  beta?: number;
  control_rate?: number;
}

export type ModelConfig =
  | BetaModelConfig
  | PointModelConfig
  | RestrictedModelConfig;

export interface SessionConfig {
  n_a: number;
  n_b: number;
  alpha: number;
  model: ModelConfig;
}

export interface Snapshot {
  id: string;
  status: SessionStatus;
  e_value: number;
  log_e: number;
  blocks_completed: number;
  pending: { a: number; b: number };
  alpha: number;
  threshold: number;
  reject: boolean;
  trajectory: Array<[number, number]>;
  design: { n_a: number; n_b: number };
  model: ModelConfig;
  stop?: boolean;
}

export interface Observation {
  group: Group;
  y: 0 | 1;
}

/** Wire types mirrored from the HTTP service. */

export type Rgb = [number, number, number];

export interface PaletteResponse {
  id: string;
  colors: Rgb[];
  tags: string[];
  populations: number[];
  degenerate: boolean;
}

/** The association file format shared verbatim with the CLI's --assoc flag. */
export interface AssociationMapJson {
  pairs: [number, number][];
  discard_content: number[];
  discard_style: number[];
}

export interface LossPoint {
  iter: number;
  content: number;
  style_term: number;
  total: number;
}

export interface JobProgress {
  iter: number;
  total_iters: number;
  losses: { content: number; style_term: number; total: number } | null;
}

export interface JobStatus {
  id: string;
  status: "queued" | "running" | "done" | "failed";
  error: string | null;
  baseline: boolean;
  progress: JobProgress;
  loss_history: LossPoint[];
  config: Record<string, unknown>;
}

export interface RunConfig {
  sigma?: number;
  palette_k?: number;
  iterations?: number;
  learning_rate?: number;
  snapshot_every?: number;
  mode?: "auto" | "manual";
  seed?: number;
  alpha?: number;
  beta?: number;
  baseline?: boolean;
  max_side?: number;
}

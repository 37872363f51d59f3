export interface SummaryRequest {
  id: string;
  text: string;
  max_tokens: number;
  min_tokens: number;
}

export interface SummaryResponse {
  id: string;
  summary: string;
}

export interface DecodeConfig {
  beam_width: number;
  length_penalty: number;
  max_tokens_cap: number;
}

export interface ServiceConfig {
  model_name: string;
  max_batch: number;
  port: number;
  device: "cpu" | "accelerator";
  decode: DecodeConfig;
}

/** Hard protocol limit; a config may lower max_batch but never raise it. */
export const PROTOCOL_BATCH_CAP = 64;

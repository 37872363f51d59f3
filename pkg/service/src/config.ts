import { PROTOCOL_BATCH_CAP, ServiceConfig } from "./types";

const DEFAULTS: ServiceConfig = {
  model_name: "t5-base",
  max_batch: PROTOCOL_BATCH_CAP,
  port: 8750,
  device: "cpu",
  decode: {
    beam_width: 4,
    length_penalty: 1.0,
    max_tokens_cap: 256,
  },
};

function intEnv(env: NodeJS.ProcessEnv, key: string, fallback: number): number {
  const raw = env[key];
  if (raw === undefined) return fallback;
  const value = Number.parseInt(raw, 10);
  if (!Number.isFinite(value)) throw new Error(`${key} must be an integer, got ${raw}`);
  return value;
}

function floatEnv(env: NodeJS.ProcessEnv, key: string, fallback: number): number {
  const raw = env[key];
  if (raw === undefined) return fallback;
  const value = Number.parseFloat(raw);
  if (!Number.isFinite(value)) throw new Error(`${key} must be a number, got ${raw}`);
  return value;
}

/**
 * Build the service configuration from environment variables:
 * SUMMARIZER_MODEL, SUMMARIZER_PORT, SUMMARIZER_MAX_BATCH,
 * SUMMARIZER_DEVICE, SUMMARIZER_BEAM_WIDTH, SUMMARIZER_LENGTH_PENALTY,
 * SUMMARIZER_MAX_TOKENS_CAP. Use SUMMARIZER_MODEL=lead for the built-in
 * deterministic baseline when no pretrained checkpoint is available.
 */
export function configFromEnv(env: NodeJS.ProcessEnv = process.env): ServiceConfig {
  const device = env.SUMMARIZER_DEVICE ?? DEFAULTS.device;
  if (device !== "cpu" && device !== "accelerator") {
    throw new Error(`SUMMARIZER_DEVICE must be cpu or accelerator, got ${device}`);
  }
  const config: ServiceConfig = {
    model_name: env.SUMMARIZER_MODEL ?? DEFAULTS.model_name,
    max_batch: intEnv(env, "SUMMARIZER_MAX_BATCH", DEFAULTS.max_batch),
    port: intEnv(env, "SUMMARIZER_PORT", DEFAULTS.port),
    device,
    decode: {
      beam_width: intEnv(env, "SUMMARIZER_BEAM_WIDTH", DEFAULTS.decode.beam_width),
      length_penalty: floatEnv(env, "SUMMARIZER_LENGTH_PENALTY", DEFAULTS.decode.length_penalty),
      max_tokens_cap: intEnv(env, "SUMMARIZER_MAX_TOKENS_CAP", DEFAULTS.decode.max_tokens_cap),
    },
  };
  if (config.max_batch < 1 || config.max_batch > PROTOCOL_BATCH_CAP) {
    throw new Error(`max_batch must be in [1, ${PROTOCOL_BATCH_CAP}]`);
  }
  if (config.decode.beam_width < 1) throw new Error("beam_width must be >= 1");
  if (config.decode.max_tokens_cap < 1) throw new Error("max_tokens_cap must be >= 1");
  return config;
}

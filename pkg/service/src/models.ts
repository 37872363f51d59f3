import { DecodeConfig } from "./types";

/**
 * An opaque summarizer: text in, summary out. Token bounds count
 * whitespace tokens; the server enforces the hard cap afterwards, so a
 * model only needs to aim for them.
 */
export interface SummarizationModel {
  readonly name: string;
  summarize(text: string, maxTokens: number, minTokens: number): Promise<string>;
}

/** Sentence rule shared with the pipeline: terminator then whitespace. */
export function splitSentences(text: string): string[] {
  return text
    .trim()
    .split(/(?<=[.!?])\s+/)
    .filter((s) => s.length > 0);
}

/**
 * Deterministic lead baseline: emit sentences from the start until the
 * budget is spent (always at least one, and keep going while under the
 * floor). No dependencies, no downloads; the test suite and offline
 * deployments run on this.
 */
export class LeadModel implements SummarizationModel {
  readonly name = "lead";

  async summarize(text: string, maxTokens: number, minTokens: number): Promise<string> {
    const sentences = splitSentences(text);
    const out: string[] = [];
    let used = 0;
    for (const sentence of sentences) {
      const cost = sentence.split(/\s+/).length;
      if (out.length > 0 && used + cost > maxTokens && used >= minTokens) break;
      out.push(sentence);
      used += cost;
      if (used >= maxTokens) break;
    }
    return out.join(" ");
  }
}

// Convenience aliases for the common upstream names; transformers.js
// checkpoints live under the Xenova namespace.
const MODEL_ALIASES: Record<string, string> = {
  "t5-base": "Xenova/t5-base",
  "t5-small": "Xenova/t5-small",
};

function needsTaskPrefix(name: string): boolean {
  return /(^|\/)(flan-)?t5/i.test(name);
}

/**
 * Abstractive model behind transformers.js. Loaded lazily via dynamic
 * import so the package is an optional install; beam search with no
 * sampling keeps identical inputs producing identical summaries.
 */
export class TransformersModel implements SummarizationModel {
  readonly name: string;
  private pipe: ((input: string, options: object) => Promise<Array<{ summary_text?: string }>>) | null = null;

  constructor(
    name: string,
    private readonly decode: DecodeConfig,
    private readonly device: "cpu" | "accelerator",
  ) {
    this.name = name;
  }

  async load(): Promise<void> {
    const specifier = "@huggingface/transformers";
    let mod: { pipeline: Function };
    try {
      mod = await import(specifier);
    } catch (err) {
      throw new Error(
        `model ${this.name} needs the optional dependency ${specifier} ` +
          `(npm install ${specifier}), or set SUMMARIZER_MODEL=lead: ${err}`,
      );
    }
    const checkpoint = MODEL_ALIASES[this.name] ?? this.name;
    this.pipe = (await mod.pipeline("summarization", checkpoint, {
      device: this.device === "accelerator" ? "gpu" : "cpu",
    })) as NonNullable<typeof this.pipe>;
  }

  async summarize(text: string, maxTokens: number, minTokens: number): Promise<string> {
    if (!this.pipe) throw new Error(`model ${this.name} is not loaded`);
    const input = needsTaskPrefix(this.name) ? `summarize: ${text}` : text;
    // Whitespace tokens map to several subword tokens; overshoot and let
    // the server truncate to the exact budget.
    const output = await this.pipe(input, {
      max_new_tokens: Math.min(4 * maxTokens, 1024),
      min_new_tokens: Math.max(1, minTokens),
      num_beams: this.decode.beam_width,
      length_penalty: this.decode.length_penalty,
      do_sample: false,
    });
    return output[0]?.summary_text ?? "";
  }
}

export async function createModel(
  name: string,
  decode: DecodeConfig,
  device: "cpu" | "accelerator",
): Promise<SummarizationModel> {
  if (name === "lead") return new LeadModel();
  const model = new TransformersModel(name, decode, device);
  await model.load();
  return model;
}

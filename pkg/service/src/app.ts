import { readFileSync } from "node:fs";
import path from "node:path";

import Ajv2020 from "ajv/dist/2020";
import express, { Express, NextFunction, Request, Response } from "express";

import { SummarizationModel } from "./models";
import { BatchQueue } from "./queue";
import { ServiceConfig, SummaryRequest, SummaryResponse } from "./types";

// Single source of truth for the wire contract, shared with the
// pipeline's HTTP client.
const SCHEMA_PATH = path.resolve(__dirname, "..", "..", "schemas", "summarize-protocol.schema.json");

export interface ServiceState {
  config: ServiceConfig;
  model: SummarizationModel | null;
  clampedRequests: number;
}

export function newState(config: ServiceConfig): ServiceState {
  return { config, model: null, clampedRequests: 0 };
}

function loadBatchValidator() {
  const schema = JSON.parse(readFileSync(SCHEMA_PATH, "utf-8"));
  const ajv = new Ajv2020({ allErrors: false });
  ajv.addSchema(schema);
  const validate = ajv.compile({ $ref: `${schema.$id}#/$defs/batch_request` });
  return validate;
}

function truncateTokens(text: string, maxTokens: number): string {
  const tokens = text.split(/\s+/).filter((t) => t.length > 0);
  return tokens.slice(0, maxTokens).join(" ");
}

export function createApp(state: ServiceState): Express {
  const app = express();
  const queue = new BatchQueue();
  const validateBatch = loadBatchValidator();

  app.use(express.json({ limit: "16mb" }));

  app.get("/v1/health", (_req: Request, res: Response) => {
    if (!state.model) {
      res.status(503).json({ status: "loading", model: state.config.model_name });
      return;
    }
    res.json({
      status: "ok",
      model: state.model.name,
      device: state.config.device,
      max_batch: state.config.max_batch,
      decode: state.config.decode,
      clamped_requests: state.clampedRequests,
    });
  });

  app.post("/v1/summarize_batch", async (req: Request, res: Response) => {
    const model = state.model;
    if (!model) {
      res.status(503).json({ error: "model is loading" });
      return;
    }
    if (!validateBatch(req.body)) {
      const detail = validateBatch.errors?.[0];
      res.status(400).json({
        error: `schema violation: ${detail?.instancePath ?? ""} ${detail?.message ?? "invalid body"}`.trim(),
      });
      return;
    }
    const requests = (req.body as { requests: SummaryRequest[] }).requests;
    if (requests.length > state.config.max_batch) {
      res.status(400).json({
        error: `batch of ${requests.length} exceeds max_batch ${state.config.max_batch}`,
      });
      return;
    }
    for (const request of requests) {
      if (request.min_tokens > request.max_tokens) {
        res.status(400).json({
          error: `request ${request.id}: min_tokens ${request.min_tokens} > max_tokens ${request.max_tokens}`,
        });
        return;
      }
    }
    if (new Set(requests.map((r) => r.id)).size !== requests.length) {
      res.status(400).json({ error: "request ids must be distinct" });
      return;
    }

    try {
      const responses = await queue.run(async () => {
        const out: SummaryResponse[] = [];
        for (const request of requests) {
          const cap = state.config.decode.max_tokens_cap;
          const effectiveMax = Math.min(request.max_tokens, cap);
          if (request.max_tokens > cap) state.clampedRequests += 1;
          const raw = await model.summarize(
            request.text,
            effectiveMax,
            Math.min(request.min_tokens, effectiveMax),
          );
          let summary = truncateTokens(raw, effectiveMax);
          if (summary.length === 0) {
            // Never break the non-empty contract; fall back to the input head.
            summary = truncateTokens(request.text, effectiveMax);
          }
          out.push({ id: request.id, summary });
        }
        return out;
      });
      res.json({ responses });
    } catch (err) {
      res.status(500).json({ error: `summarization failed: ${err}` });
    }
  });

  // Body-parser rejections (bad JSON, oversize payload) become protocol 400s.
  app.use((err: Error, _req: Request, res: Response, next: NextFunction) => {
    if (res.headersSent) {
      next(err);
      return;
    }
    res.status(400).json({ error: `invalid request body: ${err.message}` });
  });

  return app;
}

/**
 * Zod schemas mirroring the service's published JSON API.
 *
 * These are the contract the explorer depends on; the contract tests replay
 * recorded service traffic through them, so a drift on either side fails
 * loudly instead of rendering garbage.
 */
import { z } from "zod";

export const VARIABLE_KEYS = [
  "population",
  "gdp_per_capita",
  "energy_intensity",
  "carbon_intensity",
  "share_fossil",
  "share_nuclear",
  "share_renewable",
] as const;

export type VariableKey = (typeof VARIABLE_KEYS)[number];

export const variableKeySchema = z.enum(VARIABLE_KEYS);

const seriesSchema = z.array(z.number().nullable());

export const panelResponseSchema = z.object({
  country: z.string(),
  years: z.array(z.number().int()),
  values: z.record(variableKeySchema, seriesSchema),
  emissions: seriesSchema,
  train_end: z.number().int(),
});
export type PanelResponse = z.infer<typeof panelResponseSchema>;

export const modelInfoSchema = z.object({
  country: z.string(),
  versions: z.array(z.number().int()),
  latest_version: z.number().int(),
  train_end: z.number().int(),
  kinds: z.array(z.enum(["node", "var"])),
});
export const modelsResponseSchema = z.array(modelInfoSchema);

export const countriesResponseSchema = z.array(z.string());

export const scenarioSpecSchema = z.object({
  mode: z.enum(["pinned", "augmented"]),
  variable: variableKeySchema.optional(),
  anchors: z.array(z.tuple([z.number(), z.number()])).optional(),
  interpolation: z.literal("linear").optional(),
  observations: z
    .array(z.tuple([z.number(), variableKeySchema, z.number()]))
    .optional(),
});
export type ScenarioSpec = z.infer<typeof scenarioSpecSchema>;

export const forecastRequestSchema = z.object({
  country: z.string(),
  model: z.enum(["node", "var"]),
  horizon: z.number().int().min(1).max(200),
  version: z.number().int().optional().nullable(),
});
export type ForecastRequest = z.infer<typeof forecastRequestSchema>;

export const scenarioRequestSchema = z.object({
  country: z.string(),
  spec: scenarioSpecSchema,
  horizon: z.number().int().min(1).max(200).optional().nullable(),
  version: z.number().int().optional().nullable(),
});
export type ScenarioRequest = z.infer<typeof scenarioRequestSchema>;

export const finetuneRequestSchema = z.object({
  country: z.string(),
  spec: scenarioSpecSchema,
  config: z.record(z.string(), z.unknown()).optional().nullable(),
  version: z.number().int().optional().nullable(),
});

export const forecastResponseSchema = z.object({
  country: z.string(),
  model: z.string(),
  years: z.array(z.number().int()),
  variables: z.record(variableKeySchema, z.array(z.number())),
  emissions: z.array(z.number()),
  metadata: z.record(z.string(), z.unknown()),
});
export type ForecastResponse = z.infer<typeof forecastResponseSchema>;

export const submittedJobSchema = z.object({ job_id: z.string() });

export const jobResponseSchema = z.object({
  job_id: z.string(),
  country: z.string(),
  status: z.enum(["queued", "running", "done", "error"]),
  error: z.string().nullable().optional(),
  result: z
    .object({
      version: z.number().int(),
      validation_mse_before: z.number(),
      validation_mse_after: z.number(),
    })
    .nullable()
    .optional(),
});

export const errorResponseSchema = z.object({
  error: z.object({ code: z.string(), message: z.string() }),
});

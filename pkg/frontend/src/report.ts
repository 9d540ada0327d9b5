/**
 * Report-file parsing and validation.
 *
 * Reports are produced by the `corrspec` CLI; this package never recomputes
 * physics, it only renders what the files contain.
 */

import { readFileSync } from "fs";

export const SCHEMA_VERSION = 1;

export interface LatticeInfo {
  n: number;
  local_dim: number;
  k: number;
  boundary: string;
}

export interface SpectrumPayload {
  spec: LatticeInfo;
  S: number;
  variant: string;
  source_id: string;
  eigenvalues: number[];
  kernel_dim: number;
  lambda1: number;
  lambda2: number;
}

export interface GapReport {
  band_index: number;
  gap: number;
  location: number;
}

export interface BandsPayload {
  spec: LatticeInfo;
  source_id: string;
  bands: number;
  momenta: number[];
  lam: number[][];
  gap_report: GapReport;
  q0: { verdict: string; kernel_dim: number; lambda1: number; lambda2: number };
}

export interface Report<P> {
  schema_version: number;
  kind: string;
  tool: string;
  deterministic: boolean;
  config: Record<string, unknown>;
  config_hash: string;
  payload: P;
}

function parseEnvelope(path: string, kind: string): Report<unknown> {
  const raw = JSON.parse(readFileSync(path, "utf8"));
  if (raw.schema_version !== SCHEMA_VERSION) {
    throw new Error(`${path}: unsupported schema_version ${raw.schema_version}`);
  }
  if (raw.kind !== kind) {
    throw new Error(`${path}: expected a ${kind} report, found kind=${raw.kind}`);
  }
  return raw as Report<unknown>;
}

export function loadSpectrumReport(path: string): Report<SpectrumPayload> {
  const report = parseEnvelope(path, "spectrum") as Report<SpectrumPayload>;
  const p = report.payload;
  if (!Array.isArray(p.eigenvalues) || p.eigenvalues.length === 0) {
    throw new Error(`${path}: empty eigenvalue list`);
  }
  if (p.eigenvalues.length !== p.S) {
    throw new Error(`${path}: ${p.eigenvalues.length} eigenvalues but S=${p.S}`);
  }
  if (p.kernel_dim < 0 || p.kernel_dim > p.S) {
    throw new Error(`${path}: kernel_dim ${p.kernel_dim} outside [0, ${p.S}]`);
  }
  return report;
}

export function loadBandsReport(path: string): Report<BandsPayload> {
  const report = parseEnvelope(path, "bands") as Report<BandsPayload>;
  const p = report.payload;
  const n = p.spec.n;
  if (!Array.isArray(p.lam) || p.lam.length !== p.bands) {
    throw new Error(`${path}: expected ${p.bands} bands, found ${p.lam?.length}`);
  }
  for (const row of p.lam) {
    if (!Array.isArray(row) || row.length !== n) {
      throw new Error(`${path}: band rows must hold ${n} momentum values`);
    }
  }
  if (p.momenta.length !== n) {
    throw new Error(`${path}: momenta list must hold ${n} entries`);
  }
  return report;
}

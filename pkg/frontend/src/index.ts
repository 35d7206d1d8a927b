/**
 * Bindings to the binghamkit command-line tool for JS/TS training loops.
 *
 * Everything goes through the CLI's documented surfaces: the batch-loss
 * JSON wire format, the quaternion CSV format, and the normconst JSON
 * output. Numbers cross the boundary as JSON doubles, so batch results
 * are bit-identical to looping over single-row requests.
 */

import { spawnSync } from 'node:child_process';
import { mkdtempSync, readFileSync, rmSync, writeFileSync } from 'node:fs';
import { tmpdir } from 'node:os';
import { join } from 'node:path';

export type ReprTag = 'P10' | 'P4+3' | 'P4+4' | 'P6+3' | 'P6+4';

export const TAG_DIMS: Record<ReprTag, number> = {
  P10: 10,
  'P4+3': 7,
  'P4+4': 8,
  'P6+3': 9,
  'P6+4': 10,
};

export interface QuadratureConfig {
  r?: number;
  omega_d?: number;
  n_min?: number;
  n?: number;
  d_frac?: number;
}

export interface BatchRequest {
  repr: ReprTag;
  /** row-major, one raw parameter vector per row (batch x dim) */
  thetas: number[][];
  /** one unit ground-truth quaternion per row (batch x 4, w first) */
  qGts: number[][];
  config?: QuadratureConfig;
}

export interface BatchResult {
  values: number[];
  grads: number[][];
}

export interface BinghamParams {
  D: number[][];
  lambda: number[];
}

export interface NormalizerOutput {
  C: number;
  dCdLambda: number[];
  imagResidual: number;
  convergenceCheck: number;
}

export interface SampleResult {
  /** n rows of unit quaternions (w, x, y, z), w >= 0 hemisphere */
  quaternions: number[][];
  acceptanceRate: number;
}

export class BindingsError extends Error {}

export class ValidationError extends BindingsError {
  constructor(message: string, public readonly row?: number) {
    super(row === undefined ? message : `row ${row}: ${message}`);
  }
}

export class NumericalError extends BindingsError {}

const CLI = process.env.BINGHAM_KIT_CLI ?? 'bingham-kit';

function runCli(args: string[]): { stdout: string; stderr: string } {
  const res = spawnSync(CLI, args, { encoding: 'utf8', maxBuffer: 1 << 28 });
  if (res.error) {
    throw new BindingsError(`failed to launch ${CLI}: ${res.error.message}`);
  }
  if (res.status === 1) {
    throw new ValidationError(res.stderr.trim());
  }
  if (res.status !== 0) {
    throw new NumericalError(res.stderr.trim());
  }
  return { stdout: res.stdout, stderr: res.stderr };
}

function withTempDir<T>(fn: (dir: string) => T): T {
  const dir = mkdtempSync(join(tmpdir(), 'binghamkit-'));
  try {
    return fn(dir);
  } finally {
    rmSync(dir, { recursive: true, force: true });
  }
}

function checkRow(row: number[], width: number, what: string, index: number): void {
  if (!Array.isArray(row) || row.length !== width) {
    throw new ValidationError(`${what}: expected ${width} entries, got ${row?.length}`, index);
  }
  for (const v of row) {
    if (typeof v !== 'number' || !Number.isFinite(v)) {
      throw new ValidationError(`${what}: non-finite entry`, index);
    }
  }
}

export function validateBatch(req: BatchRequest): void {
  const dim = TAG_DIMS[req.repr];
  if (dim === undefined) {
    throw new ValidationError(`unknown repr tag ${String(req.repr)}`);
  }
  if (req.thetas.length !== req.qGts.length) {
    throw new ValidationError(
      `row counts differ: ${req.thetas.length} thetas vs ${req.qGts.length} quaternions`,
    );
  }
  req.thetas.forEach((row, i) => checkRow(row, dim, 'theta', i));
  req.qGts.forEach((row, i) => checkRow(row, 4, 'q_gt', i));
}

/** Batched NLL value + gradient, identical to looping over single rows. */
export function batchNllGrad(req: BatchRequest): BatchResult {
  validateBatch(req);
  if (req.thetas.length === 0) {
    return { values: [], grads: [] };
  }
  return withTempDir((dir) => {
    const reqPath = join(dir, 'request.json');
    const respPath = join(dir, 'response.json');
    const wire: Record<string, unknown> = {
      repr: req.repr,
      thetas: req.thetas,
      q_gts: req.qGts,
    };
    if (req.config) {
      wire.config = req.config;
    }
    writeFileSync(reqPath, JSON.stringify(wire));
    runCli(['loss', '--input', reqPath, '--output', respPath]);
    return JSON.parse(readFileSync(respPath, 'utf8')) as BatchResult;
  });
}

function quaternionCsv(quaternions: number[][]): string {
  const rows = quaternions.map((q) => q.join(','));
  return ['w,x,y,z', ...rows, ''].join('\n');
}

/** Per-row log-density of unit quaternions under a canonical distribution. */
export function batchLogPdf(params: BinghamParams, quaternions: number[][]): number[] {
  quaternions.forEach((row, i) => checkRow(row, 4, 'quaternion', i));
  if (quaternions.length === 0) {
    return [];
  }
  return withTempDir((dir) => {
    const paramsPath = join(dir, 'params.json');
    const csvPath = join(dir, 'quats.csv');
    const outPath = join(dir, 'logpdf.txt');
    writeFileSync(paramsPath, JSON.stringify(params));
    writeFileSync(csvPath, quaternionCsv(quaternions));
    runCli(['pdf', '--params', paramsPath, '--input', csvPath, '--output', outPath]);
    return readFileSync(outPath, 'utf8')
      .trim()
      .split('\n')
      .map((line) => Number(line));
  });
}

/** Deterministic rejection sampling; same (params, n, seed) gives the same draws. */
export function sample(params: BinghamParams, n: number, seed = 0): SampleResult {
  if (!Number.isInteger(n) || n < 1) {
    throw new ValidationError(`need an integer n >= 1, got ${n}`);
  }
  return withTempDir((dir) => {
    const paramsPath = join(dir, 'params.json');
    const csvPath = join(dir, 'samples.csv');
    writeFileSync(paramsPath, JSON.stringify(params));
    const { stderr } = runCli([
      'sample', '--params', paramsPath, '--n', String(n),
      '--seed', String(seed), '--output', csvPath,
    ]);
    const lines = readFileSync(csvPath, 'utf8').trim().split('\n').slice(1);
    const quaternions = lines.map((line) => line.split(',').map(Number));
    const match = stderr.match(/acceptance_rate = ([0-9.eE+-]+)/);
    return { quaternions, acceptanceRate: match ? Number(match[1]) : NaN };
  });
}

/** Normalizing constant with gradient and diagnostics. */
export function normalizingConstant(
  lambda: number[],
  config?: QuadratureConfig,
): NormalizerOutput {
  checkRow(lambda, 4, 'lambda', 0);
  return withTempDir((dir) => {
    const outPath = join(dir, 'normconst.json');
    const args = ['normconst', '--lambda', lambda.join(','), '--output', outPath];
    if (config) {
      const cfgPath = join(dir, 'config.json');
      writeFileSync(cfgPath, JSON.stringify(config));
      args.push('--config', cfgPath);
    }
    runCli(args);
    const raw = JSON.parse(readFileSync(outPath, 'utf8'));
    return {
      C: raw.C,
      dCdLambda: raw.dC_dlambda,
      imagResidual: raw.imag_residual,
      convergenceCheck: raw.convergence_check,
    };
  });
}

/* tslint:disable */
/* eslint-disable */

export class Demo {
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Fits the mixture and returns the mean diagonal of the aligned confusion matrix.
     */
    fit(eps: number, seed: bigint, baseline: boolean): FitSummary;
    /**
     * Grey levels of fitted component `k`, ordered to match the true components.
     */
    fitted_pixels(k: number): Uint8Array;
    /**
     * `k` (1..=4) stroke components, `n` samples of `side × side` pixels.
     */
    constructor(k: number, side: number, n: number, seed: bigint);
    /**
     * Grey levels of sample `n`.
     */
    sample_pixels(n: number): Uint8Array;
    truth_pixels(k: number): Uint8Array;
    readonly side: number;
}

export class FitSummary {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly converged: boolean;
    readonly diagonalMean: number;
    readonly iterations: number;
    readonly loglik: Float64Array;
}

export class Subsystem {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly distribution: Float64Array;
    readonly ergodicCost: number;
    /**
     * Larger of the HJB and stationarity residuals.
     */
    readonly residual: number;
    /**
     * Row-major `S × S`.
     */
    readonly transition: Float64Array;
    readonly value: Float64Array;
}

/**
 * Solves the subsystem for `theta` (must sum to 1).
 */
export function solve(theta: Float64Array, eps: number): Subsystem;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_demo_free: (a: number, b: number) => void;
    readonly __wbg_fitsummary_free: (a: number, b: number) => void;
    readonly __wbg_subsystem_free: (a: number, b: number) => void;
    readonly demo_fit: (a: number, b: number, c: bigint, d: number) => [number, number, number];
    readonly demo_fitted_pixels: (a: number, b: number) => [number, number];
    readonly demo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
    readonly demo_sample_pixels: (a: number, b: number) => [number, number];
    readonly demo_side: (a: number) => number;
    readonly demo_truth_pixels: (a: number, b: number) => [number, number];
    readonly fitsummary_converged: (a: number) => number;
    readonly fitsummary_diagonalMean: (a: number) => number;
    readonly fitsummary_iterations: (a: number) => number;
    readonly fitsummary_loglik: (a: number) => [number, number];
    readonly solve: (a: number, b: number, c: number) => [number, number, number];
    readonly subsystem_distribution: (a: number) => [number, number];
    readonly subsystem_residual: (a: number) => number;
    readonly subsystem_transition: (a: number) => [number, number];
    readonly subsystem_value: (a: number) => [number, number];
    readonly subsystem_ergodicCost: (a: number) => number;
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_start: () => void;
}

export type SyncInitInput = BufferSource | WebAssembly.Module;

/**
 * Instantiates the given `module`, which can either be bytes or
 * a precompiled `WebAssembly.Module`.
 *
 * @param {{ module: SyncInitInput }} module - Passing `SyncInitInput` directly is deprecated.
 *
 * @returns {InitOutput}
 */
export function initSync(module: { module: SyncInitInput } | SyncInitInput): InitOutput;

/**
 * If `module_or_path` is {RequestInfo} or {URL}, makes a request and
 * for everything else, calls `WebAssembly.instantiate` directly.
 *
 * @param {{ module_or_path: InitInput | Promise<InitInput> }} module_or_path - Passing `InitInput` directly is deprecated.
 *
 * @returns {Promise<InitOutput>}
 */
export default function __wbg_init (module_or_path?: { module_or_path: InitInput | Promise<InitInput> } | InitInput | Promise<InitInput>): Promise<InitOutput>;

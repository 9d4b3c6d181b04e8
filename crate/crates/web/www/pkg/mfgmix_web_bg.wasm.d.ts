/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_demo_free: (a: number, b: number) => void;
export const __wbg_fitsummary_free: (a: number, b: number) => void;
export const __wbg_subsystem_free: (a: number, b: number) => void;
export const demo_fit: (a: number, b: number, c: bigint, d: number) => [number, number, number];
export const demo_fitted_pixels: (a: number, b: number) => [number, number];
export const demo_new: (a: number, b: number, c: number, d: bigint) => [number, number, number];
export const demo_sample_pixels: (a: number, b: number) => [number, number];
export const demo_side: (a: number) => number;
export const demo_truth_pixels: (a: number, b: number) => [number, number];
export const fitsummary_converged: (a: number) => number;
export const fitsummary_diagonalMean: (a: number) => number;
export const fitsummary_iterations: (a: number) => number;
export const fitsummary_loglik: (a: number) => [number, number];
export const solve: (a: number, b: number, c: number) => [number, number, number];
export const subsystem_distribution: (a: number) => [number, number];
export const subsystem_residual: (a: number) => number;
export const subsystem_transition: (a: number) => [number, number];
export const subsystem_value: (a: number) => [number, number];
export const subsystem_ergodicCost: (a: number) => number;
export const __wbindgen_externrefs: WebAssembly.Table;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_start: () => void;

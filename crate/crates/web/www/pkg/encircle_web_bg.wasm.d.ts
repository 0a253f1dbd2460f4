/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_run_free: (a: number, b: number) => void;
export const run_crossings: (a: number) => number;
export const run_fidelity_alpha: (a: number) => number;
export const run_fidelity_beta: (a: number) => number;
export const run_samples: (a: number) => [number, number];
export const sheets: (a: number, b: number, c: number) => [number, number, number, number];
export const trajectory: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
export const vorticity: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;

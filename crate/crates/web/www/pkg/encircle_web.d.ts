/* tslint:disable */
/* eslint-disable */

export class Run {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly crossings: number;
    readonly fidelity_alpha: number;
    readonly fidelity_beta: number;
    /**
     * Flat `[t, Δ, J, ov_α, ov_β]` rows.
     */
    readonly samples: Float64Array;
}

/**
 * Flat `[Δ, J, Re λ₊, Im λ₊, Re λ₋, Im λ₋]` rows over `Δ ∈ [−2γ, 2γ]`,
 * `J ∈ [0, 2γ]`.
 */
export function sheets(apt: boolean, gamma: number, resolution: number): Float64Array;

/**
 * Trajectory `n` (1–8) on the standard loop with the given period and
 * noise.
 */
export function trajectory(apt: boolean, n: number, period: number, noise: number, seed: bigint): Run;

/**
 * `[quantized, raw, enclosed EPs]` for a loop centred at `(0, j_center)`.
 */
export function vorticity(apt: boolean, j_center: number, radius: number, clockwise: boolean): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_run_free: (a: number, b: number) => void;
    readonly run_crossings: (a: number) => number;
    readonly run_fidelity_alpha: (a: number) => number;
    readonly run_fidelity_beta: (a: number) => number;
    readonly run_samples: (a: number) => [number, number];
    readonly sheets: (a: number, b: number, c: number) => [number, number, number, number];
    readonly trajectory: (a: number, b: number, c: number, d: number, e: bigint) => [number, number, number];
    readonly vorticity: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __externref_table_dealloc: (a: number) => void;
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

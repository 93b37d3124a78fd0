/* tslint:disable */
/* eslint-disable */

export class Quantized {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    readonly codes: Int32Array;
    readonly dequantized: Float64Array;
    readonly entropy_bits: number;
    readonly plain_bits: number;
    readonly wire_bytes: number;
}

/**
 * Quantize `values` with `levels` levels; `bucket = 0` means one bucket.
 */
export function quantize_vector(values: Float64Array, levels: number, linf: boolean, bucket: number, seed: number): Quantized;

/**
 * `‖w − w*‖²` per iteration on a fixed 32-dimensional quadratic. A
 * diverging run returns the rows up to detection.
 */
export function simulate(codec: string, alpha: number, beta: number, levels: number, eta: number, iterations: number, seed: number): Float64Array;

/**
 * `α²γ + (β − α)²` for the demo dimension.
 */
export function stability_lambda(alpha: number, beta: number, levels: number): number;

/**
 * ECQ-to-QSGD error-contribution ratio bound for gaps `1..=max_gap`, with
 * `β = 1 − ηa₁` on the demo quadratic.
 */
export function tau_ratio_curve(alpha: number, eta: number, levels: number, max_gap: number): Float64Array;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_quantized_free: (a: number, b: number) => void;
    readonly quantize_vector: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
    readonly quantized_codes: (a: number) => [number, number];
    readonly quantized_dequantized: (a: number) => [number, number];
    readonly quantized_entropy_bits: (a: number) => number;
    readonly quantized_plain_bits: (a: number) => number;
    readonly quantized_wire_bytes: (a: number) => number;
    readonly simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
    readonly stability_lambda: (a: number, b: number, c: number) => number;
    readonly tau_ratio_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __externref_table_dealloc: (a: number) => void;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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

/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_quantized_free: (a: number, b: number) => void;
export const quantize_vector: (a: number, b: number, c: number, d: number, e: number, f: number) => [number, number, number];
export const quantized_codes: (a: number) => [number, number];
export const quantized_dequantized: (a: number) => [number, number];
export const quantized_entropy_bits: (a: number) => number;
export const quantized_plain_bits: (a: number) => number;
export const quantized_wire_bytes: (a: number) => number;
export const simulate: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number) => [number, number, number, number];
export const stability_lambda: (a: number, b: number, c: number) => number;
export const tau_ratio_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __wbindgen_start: () => void;

/* tslint:disable */
/* eslint-disable */
export const memory: WebAssembly.Memory;
export const __wbg_flowdemo_free: (a: number, b: number) => void;
export const flowdemo_content_rgba: (a: number) => [number, number];
export const flowdemo_drift_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const flowdemo_new: (a: number) => [number, number, number];
export const flowdemo_reverse: (a: number, b: number, c: number) => [number, number, number];
export const flowdemo_reversed_recovered: (a: number) => [number, number];
export const flowdemo_reversed_stylized: (a: number) => [number, number];
export const flowdemo_set_content_rgba: (a: number, b: number, c: number) => [number, number];
export const flowdemo_set_style_rgba: (a: number, b: number, c: number) => [number, number];
export const flowdemo_side: () => number;
export const flowdemo_style_rgba: (a: number) => [number, number];
export const flowdemo_stylize: (a: number, b: number, c: number, d: number) => [number, number, number, number];
export const __wbindgen_externrefs: WebAssembly.Table;
export const __wbindgen_free: (a: number, b: number, c: number) => void;
export const __wbindgen_malloc: (a: number, b: number) => number;
export const __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
export const __externref_table_dealloc: (a: number) => void;
export const __wbindgen_start: () => void;

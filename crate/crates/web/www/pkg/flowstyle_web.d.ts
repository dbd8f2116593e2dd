/* tslint:disable */
/* eslint-disable */

export class FlowDemo {
    free(): void;
    [Symbol.dispose](): void;
    content_rgba(): Uint8Array;
    drift_curve(transfer: string, rounds: number): Float64Array;
    constructor(seed: number);
    /**
     * Runs a reverse transfer and returns the recovery error; the images are
     * then available from [`FlowDemo::reversed_stylized`] and
     * [`FlowDemo::reversed_recovered`].
     */
    reverse(transfer: string): number;
    reversed_recovered(): Uint8Array;
    reversed_stylized(): Uint8Array;
    set_content_rgba(rgba: Uint8Array): void;
    set_style_rgba(rgba: Uint8Array): void;
    static side(): number;
    style_rgba(): Uint8Array;
    /**
     * `transfer` is `adain`, `wct` or `patchswap`.
     */
    stylize(transfer: string, alpha: number): Uint8Array;
}

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_flowdemo_free: (a: number, b: number) => void;
    readonly flowdemo_content_rgba: (a: number) => [number, number];
    readonly flowdemo_drift_curve: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly flowdemo_new: (a: number) => [number, number, number];
    readonly flowdemo_reverse: (a: number, b: number, c: number) => [number, number, number];
    readonly flowdemo_reversed_recovered: (a: number) => [number, number];
    readonly flowdemo_reversed_stylized: (a: number) => [number, number];
    readonly flowdemo_set_content_rgba: (a: number, b: number, c: number) => [number, number];
    readonly flowdemo_set_style_rgba: (a: number, b: number, c: number) => [number, number];
    readonly flowdemo_side: () => number;
    readonly flowdemo_style_rgba: (a: number) => [number, number];
    readonly flowdemo_stylize: (a: number, b: number, c: number, d: number) => [number, number, number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
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

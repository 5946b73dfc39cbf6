/* tslint:disable */
/* eslint-disable */

/**
 * Volume and edge-deviation curves over the family's parameter range.
 */
export function bellows_curve(kind: string, steps: number): string;

/**
 * The spherical counterexample: bipyramid over a flexible quadrilateral
 * with equal sides, at diagonal `d`.
 */
export function bipyramid_sample(d: number): string;

/**
 * Available demo families with their parameter ranges.
 */
export function catalog(): string;

/**
 * One configuration of a family: vertex positions, wireframe, volume.
 */
export function flex_sample(kind: string, u: number): string;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly bellows_curve: (a: number, b: number, c: number) => [number, number];
    readonly bipyramid_sample: (a: number) => [number, number];
    readonly catalog: () => [number, number];
    readonly flex_sample: (a: number, b: number, c: number) => [number, number];
    readonly __wbindgen_externrefs: WebAssembly.Table;
    readonly __wbindgen_malloc: (a: number, b: number) => number;
    readonly __wbindgen_realloc: (a: number, b: number, c: number, d: number) => number;
    readonly __wbindgen_free: (a: number, b: number, c: number) => void;
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

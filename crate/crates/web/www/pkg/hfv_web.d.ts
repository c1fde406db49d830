/* tslint:disable */
/* eslint-disable */

/**
 * Polygons and one value per polygon, flattened for drawing.
 */
export class CellField {
    private constructor();
    free(): void;
    [Symbol.dispose](): void;
    /**
     * Start of polygon k in `points` (in corners) is offsets[k]; the last entry closes the list.
     */
    readonly offsets: Uint32Array;
    /**
     * x0, y0, x1, y1, ... for all polygon corners, polygon after polygon.
     */
    readonly points: Float64Array;
    readonly values: Float64Array;
}

/**
 * Long-time run on a Kershaw mesh; see [`decay_series`] for the layout.
 */
export function decay_curve(scheme: string, resolution: number, dt: number, final_time: number): Float64Array;

/**
 * Minima over the run of the positivity test, all four schemes.
 */
export function positivity_minima(resolution: number, dt: number, final_time: number): Float64Array;

/**
 * Stationary cell values of `case` on a generated mesh.
 */
export function stationary_field(case_name: string, family_name: string, resolution: number, scheme: string, flux: string): CellField;

export type InitInput = RequestInfo | URL | Response | BufferSource | WebAssembly.Module;

export interface InitOutput {
    readonly memory: WebAssembly.Memory;
    readonly __wbg_cellfield_free: (a: number, b: number) => void;
    readonly cellfield_offsets: (a: number) => [number, number];
    readonly cellfield_points: (a: number) => [number, number];
    readonly cellfield_values: (a: number) => [number, number];
    readonly decay_curve: (a: number, b: number, c: number, d: number, e: number) => [number, number, number, number];
    readonly positivity_minima: (a: number, b: number, c: number) => [number, number, number, number];
    readonly stationary_field: (a: number, b: number, c: number, d: number, e: number, f: number, g: number, h: number, i: number) => [number, number, number];
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

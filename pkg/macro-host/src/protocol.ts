/** Wire types for the macro-host protocol: one JSON message per line. */

export type JsonValue = string | number | JsonValue[];

export interface HostRequest {
	id: number;
	kind: 'variable' | 'call';
	name: string;
	args?: JsonValue[];
}

export interface HostResponse {
	id: number | null;
	ok: boolean;
	value?: JsonValue;
	error?: string;
}

export function okResponse(id: number | null, value: JsonValue): string {
	return JSON.stringify({ id, ok: true, value });
}

export function errorResponse(id: number | null, error: string): string {
	return JSON.stringify({ id, ok: false, error });
}

/** Macro results must be trees of arrays, strings and finite numbers. */
export function isSerializable(value: unknown): value is JsonValue {
	if (typeof value === 'string') return true;
	if (typeof value === 'number') return Number.isFinite(value);
	if (Array.isArray(value)) return value.every(isSerializable);
	return false;
}

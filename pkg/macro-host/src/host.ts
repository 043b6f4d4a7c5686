/**
 * Session logic: load the user's macro module and answer requests against
 * its exports.  Variables read exports directly; calls invoke exported
 * functions with the (unevaluated) argument list.  Lookups that miss fall
 * back to the bindgen alias registry, and `include` itself is builtin, so
 * one host serves user macros and bindings alike.
 */

import * as path from 'path';
import { aliasForm, include } from './bindgen';
import { errorResponse, HostRequest, isSerializable, okResponse } from './protocol';

export interface Session {
	handleLine(line: string): string;
}

type MacroModule = Record<string, unknown>;

export function loadMacroModule(modulePath: string): MacroModule {
	const resolved = path.resolve(modulePath);
	// eslint-disable-next-line @typescript-eslint/no-var-requires
	const loaded = require(resolved);
	if (loaded === null || typeof loaded !== 'object') {
		throw new Error(`macro module ${modulePath} did not export an object`);
	}
	return loaded as MacroModule;
}

export function createSession(moduleExports: MacroModule): Session {
	function resolveVariable(name: string): unknown {
		if (Object.prototype.hasOwnProperty.call(moduleExports, name)) {
			return moduleExports[name];
		}
		const alias = aliasForm(name);
		if (alias !== undefined) {
			return alias;
		}
		throw new UnresolvedError(name);
	}

	function resolveCall(name: string, args: unknown[]): unknown {
		if (Object.prototype.hasOwnProperty.call(moduleExports, name)) {
			const fn = moduleExports[name];
			if (typeof fn !== 'function') {
				throw new Error(`not callable: ${name}`);
			}
			return fn(...args);
		}
		if (name === 'include') {
			const [headers, functions, structs, typedefs] = args;
			return include(
				(headers ?? []) as never,
				(functions ?? []) as never,
				(structs ?? []) as never,
				(typedefs ?? []) as never,
			);
		}
		throw new UnresolvedError(name);
	}

	return {
		handleLine(line: string): string {
			let request: HostRequest;
			try {
				request = JSON.parse(line) as HostRequest;
			} catch {
				return errorResponse(null, `invalid request line: ${line.trim()}`);
			}
			const id = typeof request.id === 'number' ? request.id : null;
			if (!request || typeof request.name !== 'string') {
				return errorResponse(id, 'malformed request: missing name');
			}
			try {
				let value: unknown;
				if (request.kind === 'variable') {
					value = resolveVariable(request.name);
				} else if (request.kind === 'call') {
					value = resolveCall(request.name, request.args ?? []);
				} else {
					return errorResponse(id, `unknown request kind: ${String(request.kind)}`);
				}
				if (!isSerializable(value)) {
					return errorResponse(id, `non-serializable result for macro: ${request.name}`);
				}
				return okResponse(id, value);
			} catch (err) {
				if (err instanceof UnresolvedError) {
					return errorResponse(id, `unresolved macro: ${err.macroName}`);
				}
				return errorResponse(id, err instanceof Error ? err.message : String(err));
			}
		},
	};
}

class UnresolvedError extends Error {
	constructor(public readonly macroName: string) {
		super(`unresolved macro: ${macroName}`);
	}
}

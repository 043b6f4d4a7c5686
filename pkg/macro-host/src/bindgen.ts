/**
 * The builtin `include` macro: binding generation delegated to the compiler
 * CLI's bindgen command.  Typedef aliases coming back from each call are
 * remembered for the rest of the session, so variable macros like
 * `,CUmodule` resolve after the include that introduced them.
 */

import { spawnSync } from 'child_process';
import { JsonValue } from './protocol';

const aliasRegistry = new Map<string, JsonValue>();

function cliCommand(): string[] {
	const raw = process.env.CLISP_CLC || 'clc';
	return raw.split(/\s+/).filter(Boolean);
}

function nameList(value: JsonValue, what: string): string[] {
	if (!Array.isArray(value) || !value.every((x) => typeof x === 'string')) {
		throw new Error(`include: ${what} must be a list of names`);
	}
	return value as string[];
}

export function include(
	headers: JsonValue,
	functions: JsonValue,
	structs: JsonValue,
	typedefs: JsonValue,
): JsonValue[] {
	const args = ['bindgen', '--json'];
	for (const h of nameList(headers, 'headers')) args.push('--header', h);
	for (const f of nameList(functions, 'functions')) args.push('--function', f);
	for (const s of nameList(structs, 'structs')) args.push('--struct', s);
	for (const t of nameList(typedefs, 'typedefs')) args.push('--typedef', t);
	const [cmd, ...prefix] = cliCommand();
	const proc = spawnSync(cmd, [...prefix, ...args], { encoding: 'utf-8' });
	if (proc.error) {
		throw new Error(`include: could not run '${cmd}': ${proc.error.message}`);
	}
	if (proc.status !== 0) {
		throw new Error(`include: bindgen failed:\n${proc.stderr}`);
	}
	const payload = JSON.parse(proc.stdout) as {
		forms: JsonValue[];
		aliases: Record<string, JsonValue>;
	};
	for (const [name, form] of Object.entries(payload.aliases)) {
		aliasRegistry.set(name, form);
	}
	return payload.forms;
}

export function aliasForm(name: string): JsonValue | undefined {
	return aliasRegistry.get(name);
}

import { spawn } from 'child_process';
import * as path from 'path';
import { describe, expect, it } from 'vitest';
import { createSession } from '../src/host';

const HOST = path.resolve(__dirname, '../dist/main.js');
const MACROS = path.resolve(__dirname, 'fixtures/macros.cjs');

interface HostRun {
	lines: string[];
	code: number | null;
	stderr: string;
}

function runHost(requests: string[], moduleArg: string = MACROS): Promise<HostRun> {
	return new Promise((resolve, reject) => {
		const proc = spawn('node', [HOST, moduleArg]);
		let stdout = '';
		let stderr = '';
		proc.stdout.on('data', (chunk) => (stdout += chunk));
		proc.stderr.on('data', (chunk) => (stderr += chunk));
		proc.on('error', reject);
		proc.on('close', (code) => {
			resolve({ lines: stdout.split('\n').filter(Boolean), code, stderr });
		});
		proc.stdin.write(requests.map((r) => r + '\n').join(''));
		proc.stdin.end();
	});
}

describe('protocol conformance', () => {
	it('answers the three canonical requests with exact lines, then exits 0', async () => {
		const result = await runHost([
			'{"id":1,"kind":"variable","name":"EOF"}',
			'{"id":2,"kind":"call","name":"incr","args":["var",45]}',
			'{"id":3,"kind":"variable","name":"missing"}',
		]);
		expect(result.lines).toEqual([
			'{"id":1,"ok":true,"value":["trunc",-1,"int8"]}',
			'{"id":2,"ok":true,"value":["set","var",["add","var",45]]}',
			'{"id":3,"ok":false,"error":"unresolved macro: missing"}',
		]);
		expect(result.code).toBe(0);
	});

	it('responses are one line each and arrive in request order', async () => {
		const ids = [1, 2, 3, 4, 5];
		const result = await runHost(
			ids.map((id) => JSON.stringify({ id, kind: 'variable', name: 'EOF' })),
		);
		expect(result.lines.map((l) => JSON.parse(l).id)).toEqual(ids);
	});

	it('exits 1 when the module path is missing or unloadable', async () => {
		const missing = await runHost([], path.resolve(__dirname, 'fixtures/nope.cjs'));
		expect(missing.code).toBe(1);
		expect(missing.stderr).toContain('macro-host');
	});
});

describe('session semantics', () => {
	const session = createSession({
		EOF: ['trunc', -1, 'int8'],
		declare_multiple: (names: string[], typ: string) =>
			names.map((n) => ['declare', n, typ]),
		an_object: { nope: true },
		throws: () => {
			throw new Error('macro exploded');
		},
	});

	it('splicing-style calls return the list to splice', () => {
		const out = JSON.parse(
			session.handleLine(
				'{"id":7,"kind":"call","name":"declare_multiple","args":[["ch","i"],"int"]}',
			),
		);
		expect(out).toEqual({
			id: 7,
			ok: true,
			value: [
				['declare', 'ch', 'int'],
				['declare', 'i', 'int'],
			],
		});
	});

	it('rejects non-serializable values', () => {
		const out = JSON.parse(session.handleLine('{"id":1,"kind":"variable","name":"an_object"}'));
		expect(out.ok).toBe(false);
		expect(out.error).toContain('non-serializable');
	});

	it('forwards macro exceptions verbatim', () => {
		const out = JSON.parse(session.handleLine('{"id":2,"kind":"call","name":"throws","args":[]}'));
		expect(out).toEqual({ id: 2, ok: false, error: 'macro exploded' });
	});

	it('reports non-callable call targets', () => {
		const out = JSON.parse(session.handleLine('{"id":3,"kind":"call","name":"EOF","args":[]}'));
		expect(out.ok).toBe(false);
		expect(out.error).toContain('not callable');
	});

	it('answers garbage lines without dying', () => {
		const out = JSON.parse(session.handleLine('this is not json'));
		expect(out).toEqual({ id: null, ok: false, error: 'invalid request line: this is not json' });
	});
});

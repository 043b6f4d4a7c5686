import { spawnSync } from 'child_process';
import * as fs from 'fs';
import * as path from 'path';
import { describe, expect, it } from 'vitest';

const REPO_ROOT = path.resolve(__dirname, '../..');
const HOST = path.resolve(__dirname, '../dist/main.js');
const MACROS = path.resolve(__dirname, 'fixtures/macros.cjs');
const GOLDEN = path.join(REPO_ROOT, 'tests', 'golden');
const PYTHON = process.env.CLISP_PYTHON || 'python3';

const GOLDEN_CASES = ['eof_variable', 'incr_call', 'splice', 'nested', 'identity'];

function runCompilerExpand(inputPath: string): { stdout: string; status: number | null } {
	const proc = spawnSync(
		PYTHON,
		[
			'-m',
			'clisp.cli',
			'expand',
			inputPath,
			'--macros',
			MACROS,
			'--host-cmd',
			`node ${HOST}`,
		],
		{ encoding: 'utf-8', cwd: REPO_ROOT },
	);
	return { stdout: proc.stdout, status: proc.status };
}

describe('host-backed expansion equals the in-process expansion', () => {
	for (const name of GOLDEN_CASES) {
		it(`golden case: ${name}`, () => {
			const input = path.join(GOLDEN, 'inputs', `${name}.json`);
			const expected = fs.readFileSync(path.join(GOLDEN, 'expected', `${name}.json`), 'utf-8');
			const result = runCompilerExpand(input);
			expect(result.status).toBe(0);
			// The expected files are frozen from the compiler's in-process
			// resolver, so byte equality here is host-vs-in-process equality.
			expect(result.stdout).toBe(expected);
		});
	}
});

describe('builtin include macro', () => {
	const header = path.join(REPO_ROOT, 'tests', 'fixtures', 'headers', 'gpu_driver.h');
	const haveClang = spawnSync('clang', ['--version']).status === 0;

	it.skipIf(!haveClang)('serves bindings and registers aliases', async () => {
		const { spawn } = await import('child_process');
		const proc = spawn('node', [HOST, MACROS], {
			env: { ...process.env, CLISP_CLC: `${PYTHON} -m clisp.cli` },
			cwd: REPO_ROOT,
		});
		let stdout = '';
		proc.stdout.on('data', (chunk) => (stdout += chunk));
		const done = new Promise<void>((resolve) => proc.on('close', () => resolve()));
		const includeReq = {
			id: 1,
			kind: 'call',
			name: 'include',
			args: [[header], ['gdInit'], [], ['GDcontext']],
		};
		proc.stdin.write(JSON.stringify(includeReq) + '\n');
		proc.stdin.write('{"id":2,"kind":"variable","name":"GDcontext"}\n');
		proc.stdin.end();
		await done;
		const [first, second] = stdout.split('\n').filter(Boolean).map((l) => JSON.parse(l));
		expect(first.ok).toBe(true);
		expect(first.value).toEqual([['declare-fn', 'gdInit', [['flags', 'int']], 'int']]);
		expect(second).toEqual({ id: 2, ok: true, value: ['ptr', 'void'] });
	}, 30000);
});

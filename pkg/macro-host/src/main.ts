#!/usr/bin/env node
/** macro-host <module-path>: serve macro resolutions over stdin/stdout. */

import * as readline from 'readline';
import { createSession, loadMacroModule } from './host';

function main(): void {
	const modulePath = process.argv[2];
	if (!modulePath) {
		process.stderr.write('usage: macro-host <macro-module.js>\n');
		process.exit(1);
	}
	let session;
	try {
		session = createSession(loadMacroModule(modulePath));
	} catch (err) {
		process.stderr.write(`macro-host: ${err instanceof Error ? err.message : String(err)}\n`);
		process.exit(1);
		return;
	}
	const rl = readline.createInterface({ input: process.stdin, terminal: false });
	rl.on('line', (line) => {
		if (!line.trim()) {
			return;
		}
		process.stdout.write(session.handleLine(line) + '\n');
	});
	rl.on('close', () => {
		process.exit(0);
	});
}

main();

/**
 * Thin process wrapper around the mrifuse command-line tool.
 *
 * The command is resolved from MRIFUSE_CLI (a space-separated command line,
 * e.g. "python3 -m mrifuse.cli") and falls back to the `mrifuse` console
 * script on PATH. Failures surface the CLI's stderr verbatim so the
 * toolkit's error names reach the caller.
 */

import { spawnSync } from "node:child_process";

export class MrifuseCliError extends Error {
  constructor(
    message: string,
    public readonly exitCode: number | null,
    public readonly stderr: string,
  ) {
    super(message);
    this.name = "MrifuseCliError";
  }
}

export function resolveCommand(): string[] {
  const fromEnv = process.env.MRIFUSE_CLI;
  if (fromEnv && fromEnv.trim()) return fromEnv.trim().split(/\s+/);
  return ["mrifuse"];
}

export interface RunResult {
  exitCode: number;
  stdout: string;
  stderr: string;
}

/**
 * Run a mrifuse subcommand synchronously.
 *
 * Exit codes listed in `okCodes` (default: only 0) are returned; anything
 * else throws MrifuseCliError carrying stderr.
 */
export function runCli(args: string[], okCodes: number[] = [0]): RunResult {
  const [cmd, ...prefix] = resolveCommand();
  const proc = spawnSync(cmd, [...prefix, ...args], {
    encoding: "utf8",
    maxBuffer: 256 * 1024 * 1024,
  });
  if (proc.error) {
    throw new MrifuseCliError(
      `failed to launch ${cmd}: ${proc.error.message} (set MRIFUSE_CLI?)`,
      null,
      "",
    );
  }
  const exitCode = proc.status ?? -1;
  if (!okCodes.includes(exitCode)) {
    throw new MrifuseCliError(
      `mrifuse ${args[0]} exited with code ${exitCode}: ${proc.stderr.trim()}`,
      exitCode,
      proc.stderr,
    );
  }
  return { exitCode, stdout: proc.stdout, stderr: proc.stderr };
}

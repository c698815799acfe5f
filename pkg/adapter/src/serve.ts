/**
 * Oracle server entry point.
 *
 *   node dist/serve.js --stdio [--seed N]
 *   node dist/serve.js --tcp PORT [--seed N]
 */

import { EmotionModel } from "./model.js";
import { serveStream, serveTcp } from "./protocol.js";

function argValue(argv: string[], flag: string): string | undefined {
    const at = argv.indexOf(flag);
    return at >= 0 ? argv[at + 1] : undefined;
}

async function main(): Promise<void> {
    const argv = process.argv.slice(2);
    const seed = Number(argValue(argv, "--seed") ?? "0");
    const model = new EmotionModel(seed);
    const tcp = argValue(argv, "--tcp");
    if (tcp !== undefined) {
        const server = serveTcp(model, Number(tcp));
        server.on("listening", () => {
            console.error(`listening on :${tcp}`);
        });
        return;
    }
    await serveStream(model, process.stdin, process.stdout);
}

main().catch((err) => {
    console.error(err);
    process.exit(1);
});

import { createApp, newState } from "./app";
import { configFromEnv } from "./config";
import { createModel } from "./models";

function main(): void {
  const config = configFromEnv();
  const state = newState(config);
  const app = createApp(state);

  const server = app.listen(config.port, () => {
    console.log(`summarizer service on :${config.port}, loading model ${config.model_name}`);
  });

  // Serve 503s while the model loads; flip to ready when done.
  createModel(config.model_name, config.decode, config.device)
    .then((model) => {
      state.model = model;
      console.log(`model ${model.name} ready`);
    })
    .catch((err) => {
      console.error(`model load failed: ${err}`);
      server.close(() => process.exit(1));
    });

  for (const signal of ["SIGINT", "SIGTERM"] as const) {
    process.on(signal, () => server.close(() => process.exit(0)));
  }
}

main();

// Browser entry point. The service origin defaults to the page's own origin
// and can be overridden with ?api=http://host:port for cross-origin setups
// (e.g. the UI on a static file server, the service on :8000).

import { ClausekitClient } from './api.js';
import { createApp } from './app.js';

const root = document.getElementById('app');
if (root) {
  const params = new URLSearchParams(window.location.search);
  const baseUrl = params.get('api') ?? window.location.origin;
  const store = createApp(root, new ClausekitClient(baseUrl));
  void store.createSession([]);
}

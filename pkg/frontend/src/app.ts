// Wiring: client -> store -> view. Kept separate from the browser entry
// point so tests can assemble the app against a stubbed fetch.

import { ClausekitClient } from './api.js';
import { DraftStore } from './store.js';
import { renderApp, type ViewActions } from './view.js';

export function createApp(root: HTMLElement, client: ClausekitClient): DraftStore {
  const store = new DraftStore(client);
  const actions: ViewActions = {
    onAddClause: (label, text) => void store.addClause(label, text),
    onRemoveClause: (index) => void store.removeClause(index),
    onSelectType: (type) => void store.selectType(type),
    onAccept: (type, text) => void store.acceptClause(type, text),
  };
  store.subscribe((state) => renderApp(root, state, actions));
  return store;
}

// DOM rendering. The whole app re-renders from state on every change; at
// this size that is simpler and safer than incremental updates.
//
// Numeric scores are rendered with String(value) — the UI shows exactly the
// numbers the service sent, with no rounding or reformatting.

import type { DraftState } from './store.js';
import type { MethodDecision, RetrievedClause, TypeCandidate } from './types.js';

export interface ViewActions {
  onAddClause(label: string, text: string): void;
  onRemoveClause(index: number): void;
  onSelectType(type: string): void;
  onAccept(type: string, text: string): void;
}

function el<K extends keyof HTMLElementTagNameMap>(
  tag: K,
  attrs: Record<string, string> = {},
  text?: string,
): HTMLElementTagNameMap[K] {
  const node = document.createElement(tag);
  for (const [key, value] of Object.entries(attrs)) node.setAttribute(key, value);
  if (text !== undefined) node.textContent = text;
  return node;
}

function renderHeader(state: DraftState): HTMLElement {
  const header = el('header', { class: 'app-header' });
  header.appendChild(el('h1', {}, 'contract draft'));
  const meta = el('div', { class: 'session-meta' });
  if (state.session) {
    meta.appendChild(el('span', { 'data-role': 'session-id' }, state.session.id));
    meta.appendChild(
      el('span', { 'data-role': 'revision' }, `revision ${state.session.revision}`),
    );
    meta.appendChild(
      el('span', { 'data-role': 'fingerprint', title: 'artifact configuration fingerprint' },
        state.session.config_fingerprint.slice(0, 12)),
    );
  }
  header.appendChild(meta);
  return header;
}

function renderNotice(state: DraftState): HTMLElement | null {
  if (!state.notice) return null;
  return el('div', { class: 'notice', 'data-role': 'notice' }, state.notice);
}

function renderSidebar(state: DraftState, actions: ViewActions): HTMLElement {
  const aside = el('aside', { class: 'sidebar' });
  aside.appendChild(el('h2', {}, 'draft clauses'));
  const list = el('ul', { class: 'clause-list', 'data-role': 'draft-clauses' });
  const clauses = state.session?.clauses ?? [];
  clauses.forEach((clause, index) => {
    const item = el('li', { class: 'clause', 'data-label': clause.label });
    item.appendChild(el('strong', { class: 'clause-label' }, clause.label));
    item.appendChild(el('p', { class: 'clause-text' }, clause.text));
    const remove = el('button', { 'data-action': 'remove', 'data-index': String(index) }, 'remove');
    remove.addEventListener('click', () => actions.onRemoveClause(index));
    item.appendChild(remove);
    list.appendChild(item);
  });
  if (!clauses.length) {
    list.appendChild(el('li', { class: 'placeholder' }, 'no clauses yet'));
  }
  aside.appendChild(list);
  aside.appendChild(renderAddForm(actions));
  return aside;
}

function renderAddForm(actions: ViewActions): HTMLElement {
  const form = el('form', { class: 'add-clause', 'data-role': 'add-clause-form' });
  const label = el('input', {
    name: 'label', placeholder: 'clause type', 'aria-label': 'clause type',
  });
  const text = el('textarea', {
    name: 'text', placeholder: 'clause text', 'aria-label': 'clause text',
  });
  const submit = el('button', { type: 'submit' }, 'add clause');
  form.append(label, text, submit);
  form.addEventListener('submit', (event) => {
    event.preventDefault();
    if (label.value.trim() && text.value.trim()) {
      actions.onAddClause(label.value.trim(), text.value);
    }
  });
  return form;
}

function renderDecision(method: string, decision: MethodDecision): HTMLElement {
  const row = el('li', { class: 'decision', 'data-method': method });
  row.appendChild(el('span', { class: 'decision-method' }, method));
  row.appendChild(el('span', { class: 'decision-score' }, String(decision.score)));
  row.appendChild(
    el('span', { class: decision.relevant ? 'decision-yes' : 'decision-no' },
      decision.relevant ? 'relevant' : 'not relevant'),
  );
  if (decision.threshold !== undefined) {
    row.appendChild(el('span', { class: 'decision-detail' }, `threshold ${String(decision.threshold)}`));
  }
  if (decision.k !== undefined) {
    row.appendChild(el('span', { class: 'decision-detail' }, `k ${String(decision.k)}`));
  }
  return row;
}

function renderCandidate(
  candidate: TypeCandidate,
  selected: boolean,
  actions: ViewActions,
): HTMLElement {
  const item = el('li', {
    class: selected ? 'candidate selected' : 'candidate',
    'data-type': candidate.type,
  });
  const pick = el('button', { 'data-action': 'select-type', 'data-type': candidate.type });
  pick.appendChild(el('span', { class: 'candidate-type' }, candidate.type));
  pick.appendChild(el('span', { class: 'rank-score' }, String(candidate.rank_score)));
  pick.appendChild(el('span', { class: 'ranked-by' }, `by ${candidate.ranked_by}`));
  pick.addEventListener('click', () => actions.onSelectType(candidate.type));
  item.appendChild(pick);
  const decisions = el('ul', { class: 'decisions' });
  for (const [method, decision] of Object.entries(candidate.decisions)) {
    decisions.appendChild(renderDecision(method, decision));
  }
  item.appendChild(decisions);
  return item;
}

function renderCandidates(state: DraftState, actions: ViewActions): HTMLElement {
  const section = el('section', { class: 'candidates' });
  section.appendChild(el('h2', {}, 'suggested clause types'));
  if (state.message) {
    section.appendChild(el('p', { class: 'guidance', 'data-role': 'guidance' }, state.message));
  }
  const list = el('ul', { 'data-role': 'type-candidates' });
  for (const candidate of state.candidates) {
    list.appendChild(renderCandidate(candidate, candidate.type === state.selectedType, actions));
  }
  if (!state.candidates.length && !state.message) {
    list.appendChild(el('li', { class: 'placeholder' }, 'no suggestions'));
  }
  section.appendChild(list);
  return section;
}

function renderRetrieved(clause: RetrievedClause, type: string, actions: ViewActions): HTMLElement {
  const item = el('li', { class: 'retrieved-clause', 'data-rank': String(clause.rank) });
  const meta = el('div', { class: 'retrieved-meta' });
  meta.appendChild(el('span', { class: 'retrieved-rank' }, `#${clause.rank}`));
  meta.appendChild(el('span', { class: 'retrieved-score' }, String(clause.score)));
  meta.appendChild(el('span', { class: 'retrieved-source' }, `from ${clause.source_contract}`));
  item.appendChild(meta);
  item.appendChild(el('p', { class: 'retrieved-text' }, clause.text));
  const accept = el('button', { 'data-action': 'accept-retrieved', 'data-rank': String(clause.rank) }, 'accept');
  accept.addEventListener('click', () => actions.onAccept(type, clause.text));
  item.appendChild(accept);
  return item;
}

function renderRecommendations(state: DraftState, actions: ViewActions): HTMLElement {
  const section = el('section', { class: 'recommendations', 'data-role': 'recommendations' });
  const recs = state.recommendations;
  if (!recs) {
    if (state.selectedType) {
      section.appendChild(el('p', { class: 'placeholder' }, 'loading recommendations…'));
    }
    return section;
  }
  section.appendChild(el('h2', {}, `recommended ${recs.type} clauses`));
  if (recs.warning) {
    section.appendChild(el('p', { class: 'warning', 'data-role': 'warning' }, recs.warning));
  }
  if (recs.generated) {
    const block = el('div', { class: 'generated', 'data-role': 'generated' });
    block.appendChild(el('h3', {}, 'generated'));
    block.appendChild(el('p', { class: 'generated-text' }, recs.generated.text));
    if (recs.generated.truncated) {
      block.appendChild(el('p', { class: 'warning' }, 'generation hit the length limit'));
    }
    const accept = el('button', { 'data-action': 'accept-generated' }, 'accept generated clause');
    accept.addEventListener('click', () => actions.onAccept(recs.type, recs.generated!.text));
    block.appendChild(accept);
    section.appendChild(block);
  }
  section.appendChild(el('h3', {}, 'from the clause library'));
  const list = el('ul', { 'data-role': 'retrieved-clauses' });
  for (const clause of recs.retrieved) {
    list.appendChild(renderRetrieved(clause, recs.type, actions));
  }
  if (!recs.retrieved.length) {
    list.appendChild(el('li', { class: 'placeholder' }, 'nothing retrieved'));
  }
  section.appendChild(list);
  return section;
}

export function renderApp(root: HTMLElement, state: DraftState, actions: ViewActions): void {
  root.textContent = '';
  root.appendChild(renderHeader(state));
  const notice = renderNotice(state);
  if (notice) root.appendChild(notice);
  const layout = el('div', { class: 'layout' });
  layout.appendChild(renderSidebar(state, actions));
  const main = el('main', { class: 'main' });
  main.appendChild(renderCandidates(state, actions));
  main.appendChild(renderRecommendations(state, actions));
  layout.appendChild(main);
  root.appendChild(layout);
  root.classList.toggle('busy', state.busy);
}

"""
Scripted git repositories for tests and the bundled fixture corpus.

Repositories are real git histories built with GitPython; every commit has a
fixed author and timestamp, so mining them is deterministic.
"""
import json
import logging
from dataclasses import dataclass
from datetime import datetime, timedelta, timezone
from pathlib import Path

import numpy as np
import yaml
from git import Actor, Repo

logger = logging.getLogger(__name__)

SNAPSHOT = datetime(2018, 4, 30, tzinfo=timezone.utc)

SETUP = Actor('Acme Setup', 'setup@acme.io')
DANA = Actor('Dana Reyes', 'dana@acme.io')

REACT_APP = """import React from 'react';

export default function App() {
  return null;
}
"""


def git_date(when):
    return f"{int(when.timestamp())} +0000"


@dataclass(frozen=True)
class Change:
    """One file operation of a scripted commit; content None deletes the file"""

    path: str
    content: str = None
    append: bool = False


class FixtureRepo:
    """Builds a repository commit by commit"""

    def __init__(self, path):
        self.path = Path(path)
        self.path.mkdir(parents=True, exist_ok=True)
        self.repo = Repo.init(self.path)

    def commit(self, author, when, changes, message='change'):
        index = self.repo.index
        for change in changes:
            target = self.path / change.path
            if change.content is None:
                index.remove([change.path], working_tree=True)
                continue
            target.parent.mkdir(parents=True, exist_ok=True)
            mode = 'a' if change.append and target.exists() else 'w'
            with open(target, mode) as f:
                f.write(change.content)
            index.add([change.path])
        date = git_date(when)
        return index.commit(
            message, author=author, committer=author, author_date=date, commit_date=date,
        )

    def close(self):
        self.repo.close()


def manifest(name, dependencies):
    return json.dumps({'name': name, 'version': '1.0.0', 'dependencies': dependencies}, indent=2) + '\n'


def build_webapp(root):
    """
    acme/webapp: a react client where Dana makes three commits

    Dana's history relative to SNAPSHOT: edits the client file src/app.js 30
    days before, adds src/view.js importing react 10 days before, edits the
    README an hour before.
    """
    repo = FixtureRepo(Path(root) / 'acme' / 'webapp')
    repo.commit(SETUP, SNAPSHOT - timedelta(days=40), [
        Change('package.json', manifest('webapp', {'react': '^16.2.0'})),
        Change('src/app.js', REACT_APP),
        Change('README.md', '# webapp\n'),
    ], message='Initial commit')
    repo.commit(DANA, SNAPSHOT - timedelta(days=30), [
        Change('src/app.js', 'export const version = 1;\n', append=True),
    ], message='Export version')
    repo.commit(DANA, SNAPSHOT - timedelta(days=10), [
        Change('src/view.js', "import 'react';\nexport const view = 1;\n"),
    ], message='Add view')
    repo.commit(DANA, SNAPSHOT - timedelta(hours=1), [
        Change('README.md', 'More docs.\n', append=True),
    ], message='Docs')
    repo.close()
    return repo.path


def build_dom_utils(root):
    """acme/dom-utils: depends on react-dom only, so it is not a react client"""
    repo = FixtureRepo(Path(root) / 'acme' / 'dom-utils')
    repo.commit(SETUP, SNAPSHOT - timedelta(days=20), [
        Change('package.json', manifest('dom-utils', {'react-dom': '^16.2.0'})),
        Change('src/index.js', "import ReactDOM from 'react-dom';\nexport default ReactDOM;\n"),
    ], message='Initial commit')
    repo.close()
    return repo.path


def build_cli_tool(root):
    """acme/cli-tool: a preact client"""
    repo = FixtureRepo(Path(root) / 'acme' / 'cli-tool')
    repo.commit(SETUP, SNAPSHOT - timedelta(days=15), [
        Change('package.json', manifest('cli-tool', {'preact': '^8.2.0'})),
        Change('src/cli.js', "const h = require('preact');\nmodule.exports = h;\n"),
    ], message='Initial commit')
    repo.close()
    return repo.path


# commits, share of (new client file, client edit, other file), active span in days
ACTIVITY = {
    'novice': ((1, 3), (0.2, 0.4, 0.4), (20, 60)),
    'intermediate': ((3, 6), (0.3, 0.4, 0.3), (60, 200)),
    'expert': ((6, 10), (0.4, 0.5, 0.1), (150, 380)),
}

SCORES = {'novice': (1, 2), 'intermediate': (3,), 'expert': (4, 5)}


def dashboard_developers(per_class=12):
    developers = []
    for level in ('novice', 'intermediate', 'expert'):
        for i in range(per_class):
            number = len(developers)
            developers.append({
                'name': f"Developer {number:02d}",
                'email': f"dev{number:02d}@example.com",
                'level': level,
                'score': SCORES[level][i % len(SCORES[level])],
            })
    return developers


def build_dashboard(root, seed=7, per_class=12):
    """
    acme/dashboard: a react client with scripted developers whose activity grows with expertise

    Returns:
        (path, developers) where developers carry their email and survey score
    """
    rng = np.random.default_rng(seed)
    developers = dashboard_developers(per_class)

    plan = []
    for dev in developers:
        (low, high), shares, (short, long) = ACTIVITY[dev['level']]
        commits = int(rng.integers(low, high + 1))
        span = int(rng.integers(short, long + 1))
        start = SNAPSHOT - timedelta(days=span + 1)
        offsets = np.sort(rng.uniform(0, span * 86400, size=commits))
        for n, offset in enumerate(offsets):
            action = 'new' if n == 0 else rng.choice(['new', 'edit', 'other'], p=shares)
            plan.append((start + timedelta(seconds=int(offset)), dev['email'], n, str(action)))
    plan.sort()

    repo = FixtureRepo(Path(root) / 'acme' / 'dashboard')
    repo.commit(SETUP, SNAPSHOT - timedelta(days=400), [
        Change('package.json', manifest('dashboard', {'react': '^16.0.0'})),
        Change('src/index.js', REACT_APP),
    ], message='Initial commit')

    authors = {dev['email']: Actor(dev['name'], dev['email']) for dev in developers}
    files = {}
    for when, email, n, action in plan:
        slug = email.split('@')[0]
        if action == 'new' or (action == 'edit' and email not in files):
            path = f"src/components/{slug}_{n}.js"
            files[email] = path
            change = Change(path, f"import React from 'react';\nexport const {slug}_{n} = {n};\n")
        elif action == 'edit':
            change = Change(files[email], f"export const {slug}_edit_{n} = {n};\n", append=True)
        else:
            change = Change(f"docs/{slug}.md", f"Note {n} by {slug}\n", append=True)
        repo.commit(authors[email], when, [change], message=f"{action} {slug} {n}")
    repo.close()
    return repo.path, developers


def build_fixture_corpus(root, seed=7):
    """
    Bundled fixture corpus: repositories, ground truth and a pipeline config

    Layout under root: repos/<owner>/<name>, ground_truth.csv, libexpert.yaml

    Returns:
        path of the generated configuration file
    """
    root = Path(root)
    repos = root / 'repos'
    build_webapp(repos)
    build_dom_utils(repos)
    build_cli_tool(repos)
    _, developers = build_dashboard(repos, seed=seed)

    lines = ['developer,library,score', 'dana@acme.io,react,4']
    lines += [f"{dev['email']},react,{dev['score']}" for dev in developers]
    (root / 'ground_truth.csv').write_text('\n'.join(lines) + '\n')

    config = {
        'libraries': [{'id': 'react', 'manifest_name': 'react'}],
        'repos': {'source': 'directory', 'path': 'repos'},
        'snapshot': SNAPSHOT.strftime('%Y-%m-%dT%H:%M:%SZ'),
        'output': 'out',
        'ground_truth': 'ground_truth.csv',
        'scheme': 'ternary',
        'classifiers': ['rf', 'svm', 'zeror'],
        'seed': seed,
        'k_max': 6,
        'forest_grid': {'n_estimators': [25], 'max_depth': [None, 4]},
        'svm_grid': {'kernel': ['linear', 'rbf'], 'C': [1, 10]},
        'kmeans_restarts': 10,
    }
    config_path = root / 'libexpert.yaml'
    config_path.write_text(yaml.safe_dump(config, sort_keys=False))
    logger.info(f"Fixture corpus written to {root}")
    return config_path

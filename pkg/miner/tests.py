import shutil
import tempfile
from datetime import timedelta
from pathlib import Path
from unittest import mock

from django.test import SimpleTestCase

from corpus.builder import build_corpus
from corpus.exceptions import ApiError
from corpus.records import ClientProject, LibrarySpec, ScanReport
from corpus.sources import DirectorySource
from libexpert.exceptions import ConfigurationError
from pipeline.fixtures import (
    DANA, REACT_APP, SETUP, SNAPSHOT, Change, FixtureRepo, build_dashboard, build_webapp, git_date, manifest,
)
from .diffs import count_added_imports, line_churn
from .events import read_events, write_events
from .exceptions import EventFormatError
from .history import mine_projects, scan_history
from .records import AuthorRef, CommitEvent
from .resolvers import EmailResolver, RemoteAccountResolver, get_identity_resolver, resolve_identities

REACT = LibrarySpec(id='react', manifest_name='react')

TWO_IMPORTS = """diff --git a/src/a.js b/src/a.js
index 1111111..2222222 100644
--- a/src/a.js
+++ b/src/a.js
@@ -1,2 +1,4 @@
+const React = require('react');
+const Addons = require('react/addons');
 const x = 1;
 module.exports = x;
"""

REMOVED_IMPORT = """--- a/src/a.js
+++ b/src/a.js
@@ -1,2 +1 @@
-import React from 'react';
 export default 1;
"""

CONTEXT_ONLY = """--- a/src/a.js
+++ b/src/a.js
@@ -1,3 +1,4 @@
 import React from 'react';
 import 'react/addons';
+export const y = 2;
 export default 1;
"""


class DiffTestCase(SimpleTestCase):
    """Test cases for unified diff reading"""

    def test_two_added_requires(self):
        self.assertEqual(count_added_imports(TWO_IMPORTS, REACT), 2)

    def test_removals_never_count(self):
        self.assertEqual(count_added_imports(REMOVED_IMPORT, REACT), 0)

    def test_context_lines_ignored(self):
        self.assertEqual(count_added_imports(CONTEXT_ONLY, REACT), 0)

    def test_line_churn(self):
        self.assertEqual(line_churn(TWO_IMPORTS), (2, 0))
        self.assertEqual(line_churn(REMOVED_IMPORT), (0, 1))

    def test_headers_are_not_churn(self):
        # an added line that looks like a header still counts
        diff = "--- a/x.js\n+++ b/x.js\n@@ -0,0 +1,2 @@\n+++counter;\n+--other;\n"
        self.assertEqual(line_churn(diff), (2, 0))

    def test_binary_diff_has_no_churn(self):
        diff = "diff --git a/logo.png b/logo.png\nindex 1..2 100644\nBinary files a/logo.png and b/logo.png differ\n"
        self.assertEqual(line_churn(diff), (0, 0))

    def test_no_newline_marker(self):
        diff = "--- a/x.js\n+++ b/x.js\n@@ -1 +1 @@\n-a\n\\ No newline at end of file\n+b\n"
        self.assertEqual(line_churn(diff), (1, 1))


class ResolverTestCase(SimpleTestCase):
    """Test cases for identity resolution"""

    def test_same_email_one_identity(self):
        identities = resolve_identities([('Dana', 'dana@acme.io'), ('D. Reyes', 'Dana@Acme.io ')], EmailResolver())
        self.assertEqual(len({identity.account_id for identity in identities.values()}), 1)

    def test_distinct_emails_offline(self):
        identities = resolve_identities([('A', 'a@x.io'), ('B', 'b@x.io')], EmailResolver())
        self.assertEqual(identities['a@x.io'].account_id, 'a@x.io')
        self.assertEqual(identities['b@x.io'].account_id, 'b@x.io')

    def test_remote_resolver_merges_aliases(self):
        client = mock.Mock(token='secret')
        client.commit_author_login.side_effect = lambda repo_id, sha: 'U'
        authors = [AuthorRef('A', 'a@x.io', 'acme/webapp', 'c1'), AuthorRef('A', 'b@x.io', 'acme/webapp', 'c2')]
        identities = resolve_identities(authors, RemoteAccountResolver(client))
        self.assertIs(identities['a@x.io'], identities['b@x.io'])
        self.assertEqual(identities['a@x.io'].emails, frozenset({'a@x.io', 'b@x.io'}))
        self.assertLessEqual(len({i.account_id for i in identities.values()}), 2)

    def test_remote_failure_falls_back_and_is_reported(self):
        client = mock.Mock(token='secret')
        client.commit_author_login.side_effect = ApiError('boom', 500)
        report = ScanReport()
        resolver = RemoteAccountResolver(client, report=report)
        self.assertEqual(resolver.account_for(AuthorRef('A', 'a@x.io', 'acme/webapp', 'c1')), 'a@x.io')
        self.assertEqual(report.for_stage('identity')[0].subject, 'a@x.io')

    def test_remote_lookup_cached_per_email(self):
        client = mock.Mock(token='secret')
        client.commit_author_login.return_value = 'dana'
        resolver = RemoteAccountResolver(client)
        for sha in ('c1', 'c2', 'c3'):
            resolver.account_for(AuthorRef('Dana', 'dana@acme.io', 'acme/webapp', sha))
        client.commit_author_login.assert_called_once()

    def test_factory(self):
        self.assertIsInstance(get_identity_resolver('offline'), EmailResolver)
        with self.assertRaises(ConfigurationError):
            get_identity_resolver('remote', client=mock.Mock(token=''))
        with self.assertRaises(ConfigurationError):
            get_identity_resolver('ldap')


class HistoryTestCase(SimpleTestCase):
    """Test cases for history scanning over fixture repositories"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = Path(tempfile.mkdtemp())
        cls.repos = cls.tmp / 'repos'
        build_webapp(cls.repos)
        build_dashboard(cls.repos, per_class=4)
        cls.build_odd_repo(cls.repos / 'acme' / 'odd')
        cls.source = DirectorySource(cls.repos)
        cls.corpus = {
            project.repo_id: project
            for project in build_corpus(cls.source.list_repos(), REACT, SNAPSHOT, cls.source)
        }

    @classmethod
    def build_odd_repo(cls, path):
        """Binary blob, vendored code, a deleted client file, a merge commit and a commit after the snapshot"""
        repo = FixtureRepo(path)
        base = repo.commit(SETUP, SNAPSHOT - timedelta(days=50), [
            Change('package.json', manifest('odd', {'react': '^16.0.0'})),
            Change('src/old.js', "import React from 'react';\n"),
        ])
        repo.commit(DANA, SNAPSHOT - timedelta(days=40), [Change('logo.png', 'PNG\x00\x01\x02\x03')])
        repo.commit(DANA, SNAPSHOT - timedelta(days=35), [
            Change('node_modules/react/index.js', "import React from 'react';\n"),
        ])
        head = repo.commit(DANA, SNAPSHOT - timedelta(days=30), [Change('src/old.js')])
        repo.repo.index.commit(
            'Merge', parent_commits=[head, base], author=DANA, committer=DANA,
            author_date=git_date(SNAPSHOT - timedelta(days=20)), commit_date=git_date(SNAPSHOT - timedelta(days=20)),
        )
        repo.commit(DANA, SNAPSHOT + timedelta(days=5), [Change('src/late.js', "import 'react';\n")])
        repo.close()

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)
        super().tearDownClass()

    def scan(self, repo_id, resolver=None):
        repo = self.source.open(repo_id)
        try:
            return scan_history(self.corpus[repo_id], REACT, resolver or EmailResolver(), repo)
        finally:
            repo.close()

    def test_golden_developer_events(self):
        events = [event for event in self.scan('acme/webapp') if event.developer == 'dana@acme.io']
        self.assertEqual(len(events), 3)
        self.assertEqual([event.touched_client_file for event in events], [True, True, False])
        self.assertEqual([event.imports_added for event in events], [0, 1, 0])
        self.assertEqual([event.churn_total for event in events], [1, 2, 1])
        self.assertEqual([event.churn_client for event in events], [1, 2, 0])
        self.assertEqual(events[1].authored_at, SNAPSHOT - timedelta(days=10))

    def test_root_commit_adds_its_imports(self):
        root = next(event for event in self.scan('acme/webapp') if event.developer == 'setup@acme.io')
        self.assertTrue(root.touched_client_file)
        self.assertEqual(root.imports_added, 1)
        self.assertEqual(root.churn_client, len(REACT_APP.splitlines()))

    def test_events_ordered_by_time(self):
        events = self.scan('acme/dashboard')
        keys = [(event.authored_at, event.commit_id) for event in events]
        self.assertEqual(keys, sorted(keys))

    def test_no_projects_no_events(self):
        self.assertEqual(mine_projects([], REACT, EmailResolver(), self.source), [])

    def test_binary_file_contributes_no_churn(self):
        events = self.scan('acme/odd')
        binary = next(event for event in events if event.authored_at == SNAPSHOT - timedelta(days=40))
        self.assertEqual(binary.churn_total, 0)
        self.assertFalse(binary.touched_client_file)

    def test_vendored_file_is_not_a_client_file(self):
        events = self.scan('acme/odd')
        vendored = next(event for event in events if event.authored_at == SNAPSHOT - timedelta(days=35))
        self.assertFalse(vendored.touched_client_file)
        self.assertEqual(vendored.imports_added, 0)
        self.assertEqual(vendored.churn_total, 1)

    def test_deleted_client_file_judged_on_pre_image(self):
        events = self.scan('acme/odd')
        deletion = next(event for event in events if event.authored_at == SNAPSHOT - timedelta(days=30))
        self.assertTrue(deletion.touched_client_file)
        self.assertEqual(deletion.churn_client, 1)
        self.assertEqual(deletion.imports_added, 0)

    def test_merge_commits_excluded(self):
        events = self.scan('acme/odd')
        self.assertNotIn(SNAPSHOT - timedelta(days=20), [event.authored_at for event in events])

    def test_history_stops_at_snapshot_head(self):
        events = self.scan('acme/odd')
        self.assertTrue(all(event.authored_at <= SNAPSHOT for event in events))

    def test_imports_agree_with_single_pass_rediff(self):
        events = self.scan('acme/dashboard')
        repo = self.source.open('acme/dashboard')
        try:
            log = repo.git.log('-p', '--no-merges', '--format=', '--no-color', self.corpus['acme/dashboard'].head_snapshot.commit)
        finally:
            repo.close()
        self.assertEqual(sum(event.imports_added for event in events), count_added_imports(log, REACT))

    def test_identical_across_parallelism(self):
        projects = list(self.corpus.values())
        serial = mine_projects(projects, REACT, EmailResolver(), self.source, jobs=1)
        parallel = mine_projects(projects, REACT, EmailResolver(), self.source, jobs=4)
        self.assertEqual(serial, parallel)

    def test_unreachable_project_recorded(self):
        missing = ClientProject(
            repo_id='acme/gone',
            manifest_evidence=self.corpus['acme/webapp'].manifest_evidence,
            client_files=(),
            head_snapshot=self.corpus['acme/webapp'].head_snapshot,
        )
        report = ScanReport()
        events = mine_projects([missing], REACT, EmailResolver(), self.source, report)
        self.assertEqual(events, [])
        self.assertEqual(report.for_stage('miner')[0].subject, 'acme/gone')

    def test_events_csv_reloads(self):
        events = self.scan('acme/webapp')
        path = self.tmp / 'events.csv'
        write_events(events, path)
        self.assertEqual(read_events(path), events)
        self.assertEqual(path.read_text().splitlines()[0],
                         'developer,project,commit,authored_at,churn_total,churn_client,touched_client_file,imports_added')


class EventFormatTestCase(SimpleTestCase):
    """Test cases for events.csv validation"""

    def test_invariants_enforced(self):
        with self.assertRaises(ValueError):
            CommitEvent('d', 'p', 'c', SNAPSHOT, 1, 2, True, 0)
        with self.assertRaises(ValueError):
            CommitEvent('d', 'p', 'c', SNAPSHOT, 2, 0, False, 1)

    def test_bad_row_reports_line(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'events.csv'
            path.write_text(
                'developer,project,commit,authored_at,churn_total,churn_client,touched_client_file,imports_added\n'
                'd@x.io,acme/webapp,abc,2018-04-01T00:00:00Z,3,1,true,1\n'
                'd@x.io,acme/webapp,def,2018-04-02T00:00:00Z,3,1,maybe,0\n'
            )
            with self.assertRaises(EventFormatError) as ctx:
                read_events(path)
            self.assertIn(':3:', str(ctx.exception))

    def test_wrong_columns(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'events.csv'
            path.write_text('developer,commit\nd,abc\n')
            with self.assertRaises(EventFormatError):
                read_events(path)

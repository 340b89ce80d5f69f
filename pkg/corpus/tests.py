import json
import shutil
import tempfile
from pathlib import Path
from unittest import mock

from django.test import SimpleTestCase
from git import Repo

from libexpert.exceptions import ConfigurationError
from pipeline.fixtures import SNAPSHOT, build_cli_tool, build_dom_utils, build_webapp
from .builder import build_corpus
from .exceptions import ApiError, ManifestParseError, RateLimitExceeded, UnsupportedManifestError
from .hosting import HostingApiClient
from .imports import decode_source, detect_client_files, is_vendored
from .manifests import parse_manifest
from .records import LibrarySpec, ScanReport
from .serializers import LibrarySpecSerializer, dump_corpus, load_corpus
from .sources import DirectorySource, ListFileSource, get_repo_source

REACT = LibrarySpec(id='react', manifest_name='react')
PREACT = LibrarySpec(id='preact', manifest_name='preact')


class LibrarySpecTestCase(SimpleTestCase):
    """Test cases for library declarations"""

    def test_import_patterns_default_to_manifest_name(self):
        self.assertEqual(REACT.import_patterns, ('react',))

    def test_manifest_name_with_whitespace_rejected(self):
        with self.assertRaises(ConfigurationError):
            LibrarySpec(id='bad', manifest_name='re act')

    def test_serializer_rejects_trailing_separator(self):
        serializer = LibrarySpecSerializer(data={'id': 'react', 'manifest_name': 'react', 'import_patterns': ['react/']})
        self.assertFalse(serializer.is_valid())
        self.assertIn('import_patterns', serializer.errors)

    def test_serializer_creates_spec(self):
        serializer = LibrarySpecSerializer(data={
            'id': 'mongo', 'manifest_name': 'mongodb', 'repo_slug': 'mongodb/node-mongodb-native',
        })
        self.assertTrue(serializer.is_valid(), serializer.errors)
        spec = serializer.save()
        self.assertEqual(spec.import_patterns, ('mongodb',))
        self.assertEqual(spec.repo_slug, 'mongodb/node-mongodb-native')


class ManifestTestCase(SimpleTestCase):
    """Test cases for dependency manifest parsing"""

    def test_runtime_dependency(self):
        content = b'{"dependencies": {"react": "^16.2.0"}}'
        evidence = parse_manifest(content, REACT)
        self.assertEqual(evidence.section, 'dependencies')
        self.assertEqual(evidence.kind, 'package.json')

    def test_development_dependency_counts(self):
        content = b'{"devDependencies": {"react": "^16.2.0"}}'
        self.assertEqual(parse_manifest(content, REACT).section, 'devDependencies')

    def test_no_dependency_sections(self):
        self.assertIsNone(parse_manifest(b'{"name": "empty", "version": "1.0.0"}', REACT))

    def test_key_equality_not_substring(self):
        content = b'{"dependencies": {"react-dom": "^16.2.0", "preact": "8"}}'
        self.assertIsNone(parse_manifest(content, REACT))

    def test_bower_manifest(self):
        content = b'{"dependencies": {"react": "~15"}}'
        evidence = parse_manifest(content, REACT, path='client/bower.json')
        self.assertEqual(evidence.kind, 'bower.json')
        self.assertEqual(evidence.path, 'client/bower.json')

    def test_malformed_manifest_reports_byte_offset(self):
        content = b'{"dependencies": {"react": }}'
        with self.assertRaises(ManifestParseError) as ctx:
            parse_manifest(content, REACT)
        self.assertEqual(ctx.exception.offset, content.index(b'}'))

    def test_offset_counts_bytes_not_characters(self):
        content = '{"name": "café", "dependencies": [}'.encode('utf-8')
        with self.assertRaises(ManifestParseError) as ctx:
            parse_manifest(content, REACT)
        self.assertEqual(ctx.exception.offset, content.index(b'}'))

    def test_non_object_root(self):
        with self.assertRaises(ManifestParseError):
            parse_manifest(b'["react"]', REACT)

    def test_unsupported_format(self):
        with self.assertRaises(UnsupportedManifestError):
            parse_manifest(b'{}', REACT, path='composer.json')


class ImportDetectionTestCase(SimpleTestCase):
    """Test cases for lexical import detection"""

    # (line, imports react)
    ORACLE = [
        ("const r = require('react')", True),
        ('const r = require("react");', True),
        ("var R = require ( 'react' )", True),
        ("import React from 'react';", True),
        ('import React, { Component } from "react"', True),
        ("import * as React from 'react'", True),
        ("import 'react';", True),
        ("import x from 'react/addons'", True),
        ("const t = require('react/lib/ReactTestUtils')", True),
        ("import { render } from 'react/dom/server'", True),
        ("import x from 'preact'", False),
        ("import x from 'react-dom'", False),
        ("const d = require('react-dom/server')", False),
        ("import x from 'reactive'", False),
        ("import x from './react'", False),
        ("import x from '@scope/react'", False),
        ("const react = 'react';", False),
        ("// see the react docs", False),
        ("require('preact/compat')", False),
        ("export default 'react'", False),
    ]

    def test_oracle_lines(self):
        for line, expected in self.ORACLE:
            with self.subTest(line=line):
                self.assertEqual(detect_client_files(line, REACT), expected)

    def test_prefix_without_separator_does_not_match(self):
        self.assertTrue(detect_client_files("import h from 'preact'", PREACT))
        self.assertFalse(detect_client_files("import h from 'preact-router'", PREACT))

    def test_multiple_patterns(self):
        lib = LibrarySpec(id='mongo', manifest_name='mongodb', import_patterns=('mongodb', 'mongodb-core'))
        self.assertTrue(detect_client_files("const c = require('mongodb-core')", lib))
        self.assertFalse(detect_client_files("const c = require('mongoose')", lib))

    def test_binary_content(self):
        self.assertIsNone(decode_source(b'\x89PNG\x00\x00'))
        self.assertEqual(decode_source(b"import 'react';"), "import 'react';")

    def test_vendored_paths(self):
        self.assertTrue(is_vendored('node_modules/react/index.js', {'node_modules'}))
        self.assertFalse(is_vendored('src/node_modules.js', {'node_modules'}))


class CorpusBuildTestCase(SimpleTestCase):
    """Test cases for corpus construction over fixture repositories"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.tmp = Path(tempfile.mkdtemp())
        cls.repos = cls.tmp / 'repos'
        build_webapp(cls.repos)
        build_dom_utils(cls.repos)
        build_cli_tool(cls.repos)
        cls.source = DirectorySource(cls.repos)

    @classmethod
    def tearDownClass(cls):
        shutil.rmtree(cls.tmp, ignore_errors=True)
        super().tearDownClass()

    def test_directory_source_lists_nested_repos(self):
        self.assertEqual(self.source.list_repos(), ['acme/cli-tool', 'acme/dom-utils', 'acme/webapp'])

    def test_one_react_client_among_three(self):
        corpus = build_corpus(self.source.list_repos(), REACT, SNAPSHOT, self.source)
        self.assertEqual([project.repo_id for project in corpus], ['acme/webapp'])
        project = corpus[0]
        self.assertEqual(project.client_files, ('src/app.js', 'src/view.js'))
        self.assertEqual(project.manifest_evidence[0].section, 'dependencies')

    def test_preact_client(self):
        corpus = build_corpus(self.source.list_repos(), PREACT, SNAPSHOT, self.source)
        self.assertEqual([project.repo_id for project in corpus], ['acme/cli-tool'])
        self.assertEqual(corpus[0].client_files, ('src/cli.js',))

    def test_order_invariant_under_permutation(self):
        ids = self.source.list_repos()
        forward = build_corpus(ids, REACT, SNAPSHOT, self.source)
        backward = build_corpus(list(reversed(ids)), REACT, SNAPSHOT, self.source)
        self.assertEqual(forward, backward)

    def test_library_repository_excluded(self):
        own = LibrarySpec(id='react', manifest_name='react', repo_slug='acme/webapp')
        self.assertEqual(build_corpus(self.source.list_repos(), own, SNAPSHOT, self.source), [])

    def test_empty_repo_list(self):
        self.assertEqual(build_corpus([], REACT, SNAPSHOT, self.source), [])

    def test_unreachable_repo_recorded_and_build_continues(self):
        report = ScanReport()
        corpus = build_corpus(['acme/webapp', 'acme/missing'], REACT, SNAPSHOT, self.source, report)
        self.assertEqual(len(corpus), 1)
        issues = report.for_stage('corpus')
        self.assertEqual(len(issues), 1)
        self.assertEqual(issues[0].subject, 'acme/missing')

    def test_corrupt_repository_recorded_and_build_continues(self):
        repos = self.tmp / 'corrupt'
        build_webapp(repos)
        broken = repos / 'acme' / 'broken'
        shutil.move(str(build_webapp(self.tmp / 'scratch')), str(broken))
        repo = Repo(broken)
        sha = repo.head.commit.tree['src/app.js'].hexsha
        repo.close()
        (broken / '.git' / 'objects' / sha[:2] / sha[2:]).unlink()

        report = ScanReport()
        source = DirectorySource(repos)
        corpus = build_corpus(source.list_repos(), REACT, SNAPSHOT, source, report)
        self.assertEqual([project.repo_id for project in corpus], ['acme/webapp'])
        self.assertEqual([issue.subject for issue in report.for_stage('corpus')], ['acme/broken'])

    def test_snapshot_before_history(self):
        report = ScanReport()
        corpus = build_corpus(['acme/webapp'], REACT, SNAPSHOT.replace(year=2017), self.source, report)
        self.assertEqual(corpus, [])
        self.assertIn('no commits', report.issues[0].message)

    def test_parallel_build_matches_serial(self):
        ids = self.source.list_repos()
        self.assertEqual(
            build_corpus(ids, REACT, SNAPSHOT, self.source, jobs=1),
            build_corpus(ids, REACT, SNAPSHOT, self.source, jobs=4),
        )

    def test_corpus_json_reloads(self):
        corpus = build_corpus(self.source.list_repos(), REACT, SNAPSHOT, self.source)
        path = self.tmp / 'corpus.json'
        dump_corpus(corpus, path)
        self.assertEqual(load_corpus(path), corpus)
        self.assertEqual(json.loads(path.read_text())[0]['repo_id'], 'acme/webapp')


class RepoSourceTestCase(SimpleTestCase):
    """Test cases for the repository source factory"""

    def test_list_file_source(self):
        with tempfile.TemporaryDirectory() as tmp:
            listing = Path(tmp) / 'repos.txt'
            listing.write_text('# top projects\nfacebook/react\n\nexpressjs/express\n')
            source = get_repo_source({'source': 'list', 'path': str(listing)})
            self.assertIsInstance(source, ListFileSource)
            self.assertEqual(source.list_repos(), ['facebook/react', 'expressjs/express'])
            self.assertEqual(source.path_for('facebook/react'), Path(tmp) / 'facebook' / 'react')

    def test_list_file_rejects_bad_ids(self):
        with tempfile.TemporaryDirectory() as tmp:
            listing = Path(tmp) / 'repos.txt'
            listing.write_text('not a repo id\n')
            with self.assertRaises(ConfigurationError):
                ListFileSource(listing, tmp).list_repos()

    def test_remote_source_requires_token(self):
        client = mock.Mock(token='')
        with self.assertRaises(ConfigurationError):
            get_repo_source({'source': 'remote', 'clone_root': '/tmp/clones'}, client=client)

    def test_unknown_source(self):
        with self.assertRaises(ConfigurationError):
            get_repo_source({'source': 'ftp'})


def api_response(status_code=200, payload=None, headers=None, next_url=None):
    response = mock.Mock(status_code=status_code, headers=headers or {}, text='')
    response.json.return_value = payload if payload is not None else {}
    response.links = {'next': {'url': next_url}} if next_url else {}
    return response


class HostingApiClientTestCase(SimpleTestCase):
    """Test cases for the code-hosting API client with a mocked session"""

    def client_with(self, *responses):
        session = mock.MagicMock()
        session.get.side_effect = list(responses)
        sleep = mock.Mock()
        return HostingApiClient(token='secret', base_url='https://api.example.test', session=session, sleep=sleep)

    def test_token_header(self):
        client = self.client_with()
        client.session.headers.update.assert_any_call({'Authorization': 'token secret'})

    def test_top_starred_follows_pagination(self):
        client = self.client_with(
            api_response(payload={'items': [{'full_name': 'a/one'}, {'full_name': 'b/two'}]},
                         next_url='https://api.example.test/search/repositories?page=2'),
            api_response(payload={'items': [{'full_name': 'c/three'}]}),
        )
        self.assertEqual(client.top_starred(limit=1000), ['a/one', 'b/two', 'c/three'])
        second_call = client.session.get.call_args_list[1]
        self.assertEqual(second_call.args[0], 'https://api.example.test/search/repositories?page=2')
        self.assertIsNone(second_call.kwargs['params'])

    def test_top_starred_respects_limit(self):
        client = self.client_with(
            api_response(payload={'items': [{'full_name': f"o/r{i}"} for i in range(5)]}),
        )
        self.assertEqual(client.top_starred(limit=3), ['o/r0', 'o/r1', 'o/r2'])

    def test_rate_limit_waits_then_retries(self):
        client = self.client_with(
            api_response(status_code=403, headers={'X-RateLimit-Remaining': '0', 'Retry-After': '5'}),
            api_response(payload={'author': {'login': 'dana'}}),
        )
        self.assertEqual(client.commit_author_login('acme/webapp', 'abc'), 'dana')
        client.sleep.assert_called_once_with(5.0)

    def test_rate_limit_budget_exhausted(self):
        limited = [api_response(status_code=429, headers={'Retry-After': '1'}) for _ in range(4)]
        client = self.client_with(*limited)
        with self.assertRaises(RateLimitExceeded):
            client.commit_author_login('acme/webapp', 'abc')
        self.assertEqual(client.sleep.call_count, 3)

    def test_error_status(self):
        client = self.client_with(api_response(status_code=404, payload={'message': 'Not Found'}))
        with self.assertRaises(ApiError) as ctx:
            client.commit_author_login('acme/webapp', 'abc')
        self.assertEqual(ctx.exception.status_code, 404)

    def test_unmapped_author(self):
        client = self.client_with(api_response(payload={'author': None}))
        self.assertIsNone(client.commit_author_login('acme/webapp', 'abc'))

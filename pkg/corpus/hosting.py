"""
Client for the code-hosting REST API (GitHub v3 shaped).

Used in remote mode only: listing the most-starred repositories of a language
and mapping commit authors to hosting accounts. Offline runs never build one.
"""
import logging
import time

import requests
from django.conf import settings

from .exceptions import ApiError, RateLimitExceeded

logger = logging.getLogger(__name__)

# Search endpoints never page past this many results
SEARCH_RESULT_CAP = 1000


class HostingApiClient:
    """Token-authenticated, paginated, rate-limit aware API client"""

    def __init__(self, token=None, base_url=None, session=None, sleep=time.sleep):
        tuning = settings.LIBEXPERT
        self.token = token if token is not None else settings.LIBEXPERT_API_TOKEN
        self.base_url = (base_url or settings.LIBEXPERT_API_URL).rstrip('/')
        self.page_size = tuning['API_PAGE_SIZE']
        self.max_pages = tuning['API_MAX_PAGES']
        self.max_retries = tuning['API_MAX_RETRIES']
        self.timeout = tuning['API_TIMEOUT']
        self.sleep = sleep

        self.session = session or requests.Session()
        self.session.headers.update({'Accept': 'application/vnd.github+json'})
        if self.token:
            self.session.headers.update({'Authorization': f"token {self.token}"})

    def request(self, endpoint_or_url, params=None):
        """GET an endpoint, waiting out rate limits up to the retry budget"""
        url = endpoint_or_url if endpoint_or_url.startswith('http') else self.base_url + endpoint_or_url

        for attempt in range(self.max_retries + 1):
            try:
                response = self.session.get(url, params=params, timeout=self.timeout)
            except requests.RequestException as e:
                raise ApiError(f"Request to {url} failed: {e}") from e

            if self._is_rate_limited(response):
                if attempt == self.max_retries:
                    raise RateLimitExceeded(f"Rate limit exhausted for {url}", response.status_code)
                wait = self._retry_after(response)
                logger.warning(f"Rate limited by {self.base_url}; retrying in {wait:.0f}s")
                self.sleep(wait)
                continue

            if response.status_code >= 400:
                try:
                    message = response.json().get('message', response.text)
                except ValueError:
                    message = response.text
                raise ApiError(f"{url} answered {response.status_code}: {message}", response.status_code)
            return response

        raise RateLimitExceeded(f"Rate limit exhausted for {url}")

    def paginate(self, endpoint, params=None, item_key=None, max_pages=None):
        """Follow Link rel="next" headers and collect the items of every page"""
        max_pages = max_pages or self.max_pages
        params = dict(params or {})
        params.setdefault('per_page', self.page_size)

        results = []
        url = endpoint
        for page in range(1, max_pages + 1):
            response = self.request(url, params=params)
            payload = response.json()
            items = payload.get(item_key, []) if item_key else payload
            results.extend(items)

            next_link = response.links.get('next', {}).get('url')
            if not next_link or not items:
                break
            # the next link already carries the query string
            url, params = next_link, None
        return results

    def top_starred(self, language='JavaScript', limit=SEARCH_RESULT_CAP):
        """Most-starred repositories of a language, as owner/name ids"""
        limit = min(limit, SEARCH_RESULT_CAP)
        pages = -(-limit // self.page_size)
        items = self.paginate(
            '/search/repositories',
            params={'q': f"language:{language}", 'sort': 'stars', 'order': 'desc'},
            item_key='items',
            max_pages=pages,
        )
        return [item['full_name'] for item in items[:limit]]

    def commit_author_login(self, repo_id, sha):
        """Hosting account that authored a commit, or None when unmapped"""
        payload = self.request(f"/repos/{repo_id}/commits/{sha}").json()
        author = payload.get('author') or {}
        return author.get('login')

    @staticmethod
    def _is_rate_limited(response):
        if response.status_code == 429:
            return True
        return response.status_code == 403 and response.headers.get('X-RateLimit-Remaining') == '0'

    @staticmethod
    def _retry_after(response):
        if 'Retry-After' in response.headers:
            return float(response.headers['Retry-After'])
        reset = response.headers.get('X-RateLimit-Reset')
        if reset:
            return max(float(reset) - time.time(), 1.0)
        return 60.0

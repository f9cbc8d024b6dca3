mod common;

use serde_json::json;

use common::*;
use rootcause::corpus::{apply_filters, load_dump, FilterConfig, FilterDecision, RejectReason};
use rootcause::githubclient::fixture::{FakeClock, FixtureServer, RateLimitPolicy};
use rootcause::githubclient::Clock;
use rootcause::githubclient::{write_dump, GithubClient, GithubError, RepoRef, Response, TransportError};

fn repo() -> RepoRef {
    REPO.parse().unwrap()
}

fn client(server: &FixtureServer, dir: &std::path::Path) -> GithubClient {
    GithubClient::new(api_config(dir), Box::new(server.transport()), Box::new(server.clock())).unwrap()
}

fn bug_labels() -> Vec<String> {
    vec!["bug".to_string()]
}

#[test]
fn pagination_recovers_every_issue() {
    let fx = tracker_fixture(237, 0, FakeClock::at_epoch(1_600_000_000));
    let dir = tempfile::tempdir().unwrap();
    let mut c = client(&fx.server, dir.path());
    let all = c.fetch_closed_issues(&repo()).unwrap();
    assert_eq!(all.len(), 237);
    assert_eq!(all.iter().map(|i| i.issue_id).collect::<Vec<_>>(), fx.issue_ids);
    assert_eq!(fx.server.request_count(), 3);
    let bugs = c.fetch_closed_bug_issues(&repo(), &["BUG".to_string()]).unwrap();
    assert_eq!(bugs.iter().map(|i| i.issue_id).collect::<Vec<_>>(), fx.bug_ids);
    assert!(bugs[0].body.contains('\n'));
}

#[test]
fn exact_multiple_of_page_size_fetches_trailing_empty_page() {
    let fx = tracker_fixture(200, 0, FakeClock::at_epoch(0));
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(
        client(&fx.server, dir.path())
            .fetch_closed_issues(&repo())
            .unwrap()
            .len(),
        200
    );
    assert_eq!(fx.server.request_count(), 3);
}

#[test]
fn pull_requests_are_excluded() {
    let fx = tracker_fixture(50, 7, FakeClock::at_epoch(0));
    let dir = tempfile::tempdir().unwrap();
    let got = client(&fx.server, dir.path()).fetch_closed_issues(&repo()).unwrap();
    assert_eq!(got.len(), 50);
    assert!(got.iter().all(|i| i.issue_id % 7 != 0));
}

#[test]
fn empty_repository() {
    let server = FixtureServer::new(FakeClock::at_epoch(0));
    server.route_json(url("/issues?state=closed&per_page=100&page=1"), &json!([]));
    let dir = tempfile::tempdir().unwrap();
    assert!(client(&server, dir.path())
        .fetch_closed_issues(&repo())
        .unwrap()
        .is_empty());
}

#[test]
fn linked_commits_union_timeline_and_messages() {
    let fx = tracker_fixture(60, 0, FakeClock::at_epoch(0));
    let dir = tempfile::tempdir().unwrap();
    let mut c = client(&fx.server, dir.path());
    for &id in &fx.bug_ids {
        let commits = c.fetch_linked_commits(&repo(), id).unwrap();
        let shas: Vec<String> = commits.iter().map(|c| c.sha.clone()).collect();
        assert_eq!(shas, fx.links[&id], "issue {id}");
        let cm = &commits[0];
        if cm.sha == fx.missing_sha {
            assert!(!cm.available);
            assert!(cm.files.is_empty());
        } else {
            assert!(cm.available);
            assert_eq!((cm.files[0].insertions, cm.files[0].deletions), (10, 2));
            assert_eq!((cm.files[1].insertions, cm.files[1].deletions), (0, 0));
        }
        let expected_links: Vec<u64> = if id % 2 == 1 { vec![id] } else { vec![] };
        assert_eq!(cm.linked_issue_ids, expected_links);
    }
    let commit_pages = fx.server.requests().iter().filter(|u| u.contains("/commits?")).count();
    assert_eq!(commit_pages, 1, "repository commit list is memoized");
}

#[test]
fn unavailable_commit_trips_first_filter_rule() {
    let fx = tracker_fixture(60, 0, FakeClock::at_epoch(0));
    let dir = tempfile::tempdir().unwrap();
    let issues = client(&fx.server, dir.path())
        .fetch_repository(&repo(), &bug_labels())
        .unwrap();
    let victim = issues
        .iter()
        .find(|i| i.commits.iter().any(|c| c.sha == fx.missing_sha))
        .unwrap();
    assert_eq!(
        apply_filters(victim, &FilterConfig::default()),
        FilterDecision::Reject(RejectReason::NoCommits)
    );
}

#[test]
fn commit_stats_shapes() {
    let server = FixtureServer::new(FakeClock::at_epoch(0));
    let s1 = sha(1);
    let s2 = sha(2);
    server.route_json(
        url(&format!("/commits/{s1}")),
        &json!({"sha": s1, "commit": {"message": "x"}, "files": [{"filename": "A.java", "additions": 10, "deletions": 2}]}),
    );
    server.route_json(
        url(&format!("/commits/{s2}")),
        &json!({"sha": s2, "commit": {"message": "empty"}, "files": []}),
    );
    let dir = tempfile::tempdir().unwrap();
    let mut c = client(&server, dir.path());
    let d = c.fetch_commit_stats(&repo(), &s1).unwrap().unwrap();
    assert_eq!(d.files.len(), 1);
    assert_eq!(
        (d.files[0].path.as_str(), d.files[0].insertions, d.files[0].deletions),
        ("A.java", 10, 2)
    );
    assert!(c.fetch_commit_stats(&repo(), &s2).unwrap().unwrap().files.is_empty());
    assert!(c.fetch_commit_stats(&repo(), &sha(3)).unwrap().is_none());
}

#[test]
fn warm_cache_needs_no_network() {
    let dir = tempfile::tempdir().unwrap();
    let fx = tracker_fixture(120, 0, FakeClock::at_epoch(0));
    let first = client(&fx.server, dir.path())
        .fetch_repository(&repo(), &bug_labels())
        .unwrap();
    assert!(fx.server.request_count() > 0);
    let out1 = dir.path().join("a.jsonl");
    write_dump(&first, &out1).unwrap();

    let cold = FixtureServer::new(FakeClock::at_epoch(0));
    let mut c2 = client(&cold, dir.path());
    let second = c2.fetch_repository(&repo(), &bug_labels()).unwrap();
    assert_eq!(cold.request_count(), 0);
    assert_eq!(c2.network_requests(), 0);
    let out2 = dir.path().join("b.jsonl");
    write_dump(&second, &out2).unwrap();
    assert_eq!(std::fs::read(&out1).unwrap(), std::fs::read(&out2).unwrap());
    assert_eq!(load_dump(&out2).unwrap().records, first);
}

#[test]
fn never_sends_while_rate_limited() {
    let clock = FakeClock::at_epoch(1_700_000_000);
    let fx = tracker_fixture(237, 0, clock.clone());
    let server = fx.server.with_rate_limit(RateLimitPolicy {
        limit: 7,
        window_secs: 3600,
    });
    let dir = tempfile::tempdir().unwrap();
    let mut c = client(&server, dir.path());
    let issues = c.fetch_repository(&repo(), &bug_labels()).unwrap();
    assert_eq!(issues.len(), fx.bug_ids.len());
    assert_eq!(server.violations(), 0);
    assert!(server.clock().now() > chrono::DateTime::from_timestamp(1_700_000_000 + 3600, 0).unwrap());
}

#[test]
fn rate_limit_response_waits_for_reset() {
    let clock = FakeClock::at_epoch(1_000);
    let server = FixtureServer::new(clock.clone());
    let u = url("/issues?state=closed&per_page=100&page=1");
    server.route_sequence(
        &u,
        vec![
            Ok(Response::new(403, r#"{"message":"API rate limit exceeded"}"#)
                .with_header("x-ratelimit-remaining", "0")
                .with_header("x-ratelimit-reset", "1500")),
            Ok(Response::new(200, "[]")),
        ],
    );
    let dir = tempfile::tempdir().unwrap();
    let mut c = client(&server, dir.path());
    assert!(c.fetch_closed_issues(&repo()).unwrap().is_empty());
    assert_eq!(server.request_count(), 2);
    assert_eq!(clock_now(&server), 1_500);
}

fn clock_now(server: &FixtureServer) -> i64 {
    server.clock().now().timestamp()
}

#[test]
fn auth_failures_are_fatal_with_guidance() {
    for (status, body) in [(401, "{}"), (403, r#"{"message":"Resource not accessible"}"#)] {
        let server = FixtureServer::new(FakeClock::at_epoch(0));
        server.route(
            url("/issues?state=closed&per_page=100&page=1"),
            Response::new(status, body),
        );
        let dir = tempfile::tempdir().unwrap();
        let err = client(&server, dir.path()).fetch_closed_issues(&repo()).unwrap_err();
        assert!(matches!(err, GithubError::Auth { .. }), "{err}");
        assert!(err.to_string().contains("ISSUE_API_TOKEN"));
        assert_eq!(server.request_count(), 1);
    }
}

#[test]
fn transient_failures_retry_then_succeed() {
    let server = FixtureServer::new(FakeClock::at_epoch(0));
    server.route_sequence(
        url("/issues?state=closed&per_page=100&page=1"),
        vec![
            Err(TransportError("connection reset".into())),
            Ok(Response::new(502, "bad gateway")),
            Ok(Response::new(200, "[]")),
        ],
    );
    let dir = tempfile::tempdir().unwrap();
    assert!(client(&server, dir.path())
        .fetch_closed_issues(&repo())
        .unwrap()
        .is_empty());
    assert_eq!(server.request_count(), 3);
}

#[test]
fn retries_are_bounded() {
    let server = FixtureServer::new(FakeClock::at_epoch(0));
    server.route(url("/issues?state=closed&per_page=100&page=1"), Response::new(503, ""));
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = api_config(dir.path());
    cfg.max_retries = 2;
    let mut c = GithubClient::new(cfg, Box::new(server.transport()), Box::new(server.clock())).unwrap();
    let err = c.fetch_closed_issues(&repo()).unwrap_err();
    assert!(
        matches!(err, GithubError::RetriesExhausted { attempts: 3, .. }),
        "{err}"
    );
    assert_eq!(server.request_count(), 3);
}

#[test]
fn token_goes_into_header_not_url() {
    let server = FixtureServer::new(FakeClock::at_epoch(0));
    server.route_json(url("/issues?state=closed&per_page=100&page=1"), &json!([]));
    let dir = tempfile::tempdir().unwrap();
    let mut cfg = api_config(dir.path());
    cfg.auth_token = Some("t0ken".into());
    let mut c = GithubClient::new(cfg, Box::new(server.transport()), Box::new(server.clock())).unwrap();
    c.fetch_closed_issues(&repo()).unwrap();
    let req = server.last_request().unwrap();
    assert!(!req.url.contains("t0ken"));
    assert!(req
        .headers
        .iter()
        .any(|(k, v)| k == "authorization" && v == "Bearer t0ken"));
}

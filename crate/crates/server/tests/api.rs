use std::sync::Arc;

use axum::body::{to_bytes, Body};
use axum::http::{Method, Request, StatusCode};
use axum::Router;
use hoport_core::json::{GraphDoc, RuleDoc, SignatureDoc};
use hoport_core::proofnets::{beta_rule, beta_subject, example_proof};
use hoport_core::{NodeId, PortGraph, PortRef, Rule};
use hoport_server::{load_snapshot, router, save_snapshot, AppState, CreateSession};
use serde_json::{json, Value};
use tower::ServiceExt;

async fn call(app: &Router, method: Method, uri: &str, body: Option<String>) -> (StatusCode, Value) {
    let req = Request::builder()
        .method(method)
        .uri(uri)
        .header("content-type", "application/json")
        .body(body.map(Body::from).unwrap_or_else(Body::empty))
        .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    let bytes = to_bytes(resp.into_body(), usize::MAX).await.unwrap();
    let value = if bytes.is_empty() {
        Value::Null
    } else {
        serde_json::from_slice(&bytes).unwrap()
    };
    (status, value)
}

fn payload(g: &PortGraph, rules: &[Rule]) -> String {
    serde_json::to_string(&CreateSession {
        signature: SignatureDoc::of(g.sig()),
        graph: GraphDoc::of(g),
        rules: rules.iter().map(RuleDoc::of).collect(),
    })
    .unwrap()
}

async fn session(app: &Router, g: &PortGraph, rules: &[Rule]) -> String {
    let (status, body) = call(app, Method::POST, "/sessions", Some(payload(g, rules))).await;
    assert_eq!(status, StatusCode::CREATED, "{body}");
    body["id"].as_str().unwrap().to_string()
}

fn doubled(g: &PortGraph) -> PortGraph {
    let mut out = g.clone();
    let offset = 6;
    for (id, node) in g.nodes() {
        out.add_node_with_id(NodeId(id.0 + offset), &node.label, node.class)
            .unwrap();
    }
    for e in g.edges() {
        let (a, b) = e.endpoints();
        out.add_edge(
            PortRef::new(NodeId(a.node.0 + offset), a.port),
            PortRef::new(NodeId(b.node.0 + offset), b.port),
        )
        .unwrap();
    }
    out
}

fn node_count(view: &Value) -> usize {
    view["graph"]["nodes"].as_array().unwrap().len()
}

#[tokio::test]
async fn beta_session_steps_to_normal_form() {
    let app = router(AppState::new());
    let id = session(&app, &beta_subject(), &[beta_rule()]).await;
    let (_, before) = call(&app, Method::GET, &format!("/sessions/{id}/graph"), None).await;
    assert_eq!(node_count(&before), 6);
    let (status, list) = call(&app, Method::GET, &format!("/sessions/{id}/redexes"), None).await;
    assert_eq!(status, StatusCode::OK);
    let redexes = list["redexes"].as_array().unwrap();
    assert_eq!(redexes.len(), 1);
    assert_eq!(redexes[0]["rule"], "beta");
    assert_eq!(redexes[0]["highlight"]["ho"]["n2"], json!(["n2", "n3"]));
    let apply = json!({ "index": 0, "digest": list["digest"] }).to_string();
    let (status, step) = call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(apply)).await;
    assert_eq!(status, StatusCode::OK, "{step}");
    assert_eq!(node_count(&step), 3);
    assert_eq!(step["diff"]["removed"].as_array().unwrap().len(), 6);
    assert_eq!(step["diff"]["added"].as_array().unwrap().len(), 3);
    let (_, list) = call(&app, Method::GET, &format!("/sessions/{id}/redexes"), None).await;
    assert_eq!(list["redexes"], json!([]));
    let (status, d) = call(&app, Method::GET, &format!("/sessions/{id}/derivation"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(d["steps"].as_array().unwrap().len(), 1);
    assert_eq!(d["steps"][0]["digest"], step["digest"]);
}

#[tokio::test]
async fn stale_apply_is_a_conflict_and_undo_restores() {
    let app = router(AppState::new());
    let id = session(&app, &beta_subject(), &[beta_rule()]).await;
    let (_, list) = call(&app, Method::GET, &format!("/sessions/{id}/redexes"), None).await;
    let apply = json!({ "index": 0, "digest": list["digest"] }).to_string();
    let (status, _) = call(
        &app,
        Method::POST,
        &format!("/sessions/{id}/apply"),
        Some(apply.clone()),
    )
    .await;
    assert_eq!(status, StatusCode::OK);
    let (status, body) = call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(apply)).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "Stale");
    let (status, view) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(view["digest"], list["digest"]);
    let (status, body) = call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::CONFLICT);
    assert_eq!(body["error"], "EmptyHistory");
}

#[tokio::test]
async fn redex_listing_is_stable_and_ordered() {
    let app = router(AppState::new());
    let id = session(&app, &doubled(&beta_subject()), &[beta_rule()]).await;
    let (_, first) = call(&app, Method::GET, &format!("/sessions/{id}/redexes"), None).await;
    let (_, second) = call(&app, Method::GET, &format!("/sessions/{id}/redexes"), None).await;
    assert_eq!(first, second);
    assert_eq!(first["redexes"].as_array().unwrap().len(), 2);
    let apply = json!({ "index": 2, "digest": first["digest"] }).to_string();
    let (status, body) = call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(apply)).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "BadIndex");
}

#[tokio::test]
async fn irreducible_graph_has_no_redexes() {
    let app = router(AppState::new());
    let g = example_proof();
    let id = session(&app, &g, &[]).await;
    let (status, view) = call(&app, Method::GET, &format!("/sessions/{id}/graph"), None).await;
    assert_eq!(status, StatusCode::OK);
    assert_eq!(node_count(&view), 5);
    assert_eq!(view["graph"]["edges"].as_array().unwrap().len(), 6);
    assert_eq!(view["graph"]["nodes"][0]["class"], "fo");
    assert_eq!(view["ports"]["n1"].as_array().unwrap().len(), 3);
    assert_eq!(view["interface"].as_array().unwrap().len(), 1);
    let (_, list) = call(&app, Method::GET, &format!("/sessions/{id}/redexes"), None).await;
    assert_eq!(list["redexes"], json!([]));
}

#[tokio::test]
async fn bad_requests_are_diagnosed() {
    let app = router(AppState::new());
    let (status, body) = call(&app, Method::POST, "/sessions", Some("{\"graph\": [".into())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "Malformed");
    assert!(body["detail"].as_str().unwrap().contains("EOF"));

    // The proof graph uses labels absent from an empty signature.
    let g = example_proof();
    let mut req: Value = serde_json::from_str(&payload(&g, &[])).unwrap();
    req["signature"] = json!({ "nodes": [] });
    let (status, body) = call(&app, Method::POST, "/sessions", Some(req.to_string())).await;
    assert_eq!(status, StatusCode::BAD_REQUEST);
    assert_eq!(body["error"], "SignatureMismatch");

    let (status, body) = call(&app, Method::GET, "/sessions/nope/graph", None).await;
    assert_eq!(status, StatusCode::NOT_FOUND);
    assert_eq!(body["error"], "UnknownSession");
}

#[tokio::test]
async fn interleaved_steps_keep_the_replay_invariant() {
    let state = AppState::new();
    let app = router(state.clone());
    let id = session(&app, &doubled(&beta_subject()), &[beta_rule()]).await;
    for (index, undo) in [(1, false), (0, true), (0, false)] {
        let (_, list) = call(&app, Method::GET, &format!("/sessions/{id}/redexes"), None).await;
        let apply = json!({ "index": index, "digest": list["digest"] }).to_string();
        let (status, _) = call(&app, Method::POST, &format!("/sessions/{id}/apply"), Some(apply)).await;
        assert_eq!(status, StatusCode::OK);
        if undo {
            call(&app, Method::POST, &format!("/sessions/{id}/undo"), None).await;
        }
    }
    let snapshot = state.snapshot();
    let doc = &snapshot.sessions[&id];
    assert_eq!(doc.derivation.len(), 2);

    let dir = std::env::temp_dir().join(format!("hoport-snapshot-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("sessions.json");
    save_snapshot(&state, &path).unwrap();
    let restored: Arc<AppState> = load_snapshot(&path).unwrap();
    std::fs::remove_dir_all(&dir).unwrap();
    let app2 = router(restored);
    let (_, a) = call(&app, Method::GET, &format!("/sessions/{id}/graph"), None).await;
    let (_, b) = call(&app2, Method::GET, &format!("/sessions/{id}/graph"), None).await;
    assert_eq!(a, b);
    let (status, _) = call(&app2, Method::POST, &format!("/sessions/{id}/undo"), None).await;
    assert_eq!(status, StatusCode::OK);
    let fresh = session(&app2, &beta_subject(), &[beta_rule()]).await;
    assert_ne!(fresh, id);
}

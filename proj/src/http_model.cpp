#include "httpmbt/http_model.hpp"

namespace httpmbt {

Fixture Fixture::standard() {
  return Fixture{{
      {"/a", "alpha", {false, "tag-a"}},
      {"/b", "bravo", {false, "tag-b"}},
      {"/c", "charlie", {true, "tag-c"}},
  }};
}

Fixture Fixture::small_pair() {
  return Fixture{{
      {"/a", "va", {false, "t1"}},
      {"/b", "vb", {false, "t2"}},
  }};
}

ServerState literal_state(const Fixture& f) {
  ServerState st;
  for (const auto& e : f.entries) {
    st.data[e.path] = e.value;
    st.xtag.emplace(e.path, TagExpr::literal(e.tag));
  }
  return st;
}

namespace {

SymResponse status_only(int status) {
  SymResponse r;
  r.status = status;
  return r;
}

SymResponse ok_with(const TagExpr& tag, std::string body) {
  SymResponse r;
  r.status = 200;
  r.etag = tag;
  r.body = std::move(body);
  return r;
}

SymResponse updated_with(int status, SymVar fresh_tag) {
  SymResponse r;
  r.status = status;
  r.etag = TagExpr::var(fresh_tag);
  return r;
}

// Successful write path: mint a fresh tag variable, update both maps, and
// answer with the variable in the ETag field (201 on create, 204 on update).
// Continuations may be invoked repeatedly, so captures are only read.
Model apply_update(const SymRequest& req, const ServerState& st,
                   std::function<Model(SymResponse, ServerState)> k) {
  bool existed = st.data.count(req.target) > 0;
  return fresh_then(SymKind::tag, [req, st, k, existed](SymVar x) {
    ServerState st2 = st;
    st2.data[req.target] = req.body;
    st2.xtag.insert_or_assign(req.target, TagExpr::var(x));
    return k(updated_with(existed ? 204 : 201, x), std::move(st2));
  });
}

}  // namespace

Model process(const SymRequest& req, const ServerState& st,
              std::function<Model(SymResponse, ServerState)> k) {
  auto it = st.xtag.find(req.target);
  bool present = it != st.xtag.end();

  if (req.method == "GET") {
    if (!present) return k(status_only(404), st);
    const TagExpr& stored = it->second;
    if (!req.precond || req.precond->kind != PrecondKind::if_none_match) {
      return k(ok_with(stored, st.data.at(req.target)), st);
    }
    BoolExpr cond = BoolExpr::weak_match(TagExpr::literal(req.precond->tag), stored);
    return branch(std::move(cond),
                  tau([st, k] { return k(status_only(304), st); }),
                  tau([st, k, stored, body = st.data.at(req.target)] {
                    return k(ok_with(stored, body), st);
                  }));
  }

  if (req.method == "PUT") {
    if (!req.precond) return apply_update(req, st, std::move(k));
    // Any precondition against a missing representation fails.
    if (!present) return k(status_only(412), st);
    const TagExpr& stored = it->second;
    if (req.precond->kind == PrecondKind::if_match) {
      BoolExpr cond = BoolExpr::strong_match(TagExpr::literal(req.precond->tag), stored);
      return branch(std::move(cond),
                    tau([req, st, k] { return apply_update(req, st, k); }),
                    tau([st, k] { return k(status_only(412), st); }));
    }
    BoolExpr cond = BoolExpr::weak_match(TagExpr::literal(req.precond->tag), stored);
    return branch(std::move(cond),
                  tau([st, k] { return k(status_only(412), st); }),
                  tau([req, st, k] { return apply_update(req, st, k); }));
  }

  return k(status_only(404), st);
}

Model http_server(ServerState st) {
  return recv_then([st = std::move(st)](const Packet& pkt) {
    const auto* req = std::get_if<SymRequest>(&pkt.payload);
    if (req == nullptr) {
      // Not a request: answer 404 on the same connection and keep serving.
      Packet out{pkt.conn, false, SymPayload(status_only(404))};
      return send_then(std::move(out), http_server(st));
    }
    Mcid conn = pkt.conn;
    return process(*req, st, [conn](SymResponse resp, ServerState st2) {
      Packet out{conn, false, SymPayload(std::move(resp))};
      return send_then(std::move(out), http_server(std::move(st2)));
    });
  });
}

namespace {

Model symbolic_alloc(const Fixture& f, std::size_t i, ServerState st) {
  if (i == f.entries.size()) return http_server(std::move(st));
  return fresh_then(SymKind::tag, [f, i, st](SymVar v) {
    ServerState st2 = st;
    st2.data[f.entries[i].path] = f.entries[i].value;
    st2.xtag.insert_or_assign(f.entries[i].path, TagExpr::var(v));
    return symbolic_alloc(f, i + 1, std::move(st2));
  });
}

}  // namespace

Model http_server_symbolic(const Fixture& f) { return symbolic_alloc(f, 0, ServerState{}); }

namespace {

Model proxy_loop(std::uint32_t next_fwd_id, std::map<Mcid, Mcid> routing) {
  return recv_then([next_fwd_id, routing = std::move(routing)](const Packet& pkt) -> Model {
    if (pkt.conn.origin == ConnOrigin::client_accepted) {
      Mcid fwd{next_fwd_id, ConnOrigin::server_created};
      auto routing2 = routing;
      routing2.emplace(fwd, pkt.conn);
      Packet out{fwd, false, pkt.payload};
      return send_then(std::move(out), proxy_loop(next_fwd_id + 1, std::move(routing2)));
    }
    auto it = routing.find(pkt.conn);
    if (it == routing.end()) return fail("proxy: response on unknown connection");
    Packet out{it->second, false, pkt.payload};
    return send_then(std::move(out), proxy_loop(next_fwd_id, routing));
  });
}

}  // namespace

Model proxy_model() { return proxy_loop(1, {}); }

}  // namespace httpmbt

#include "httpmbt/net_model.hpp"

#include <algorithm>
#include <set>

namespace httpmbt {

std::vector<std::size_t> oldest_in_each_conn(const std::vector<Packet>& buffer) {
  // A TCP connection carries one independent ordered stream per direction,
  // so candidates are the oldest packet of each (connection, direction).
  std::vector<std::size_t> picks;
  std::set<std::pair<Mcid, bool>> seen;
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (seen.insert({buffer[i].conn, buffer[i].to_server}).second) picks.push_back(i);
  }
  std::sort(picks.begin(), picks.end(), [&](std::size_t a, std::size_t b) {
    return std::pair(buffer[a].conn, buffer[a].to_server) <
           std::pair(buffer[b].conn, buffer[b].to_server);
  });
  return picks;
}

namespace {

std::vector<Packet> without(const std::vector<Packet>& buffer, std::size_t idx) {
  std::vector<Packet> out;
  out.reserve(buffer.size() - 1);
  for (std::size_t i = 0; i < buffer.size(); ++i) {
    if (i != idx) out.push_back(buffer[i]);
  }
  return out;
}

Model absorb_branch(const NetState& st) {
  return recv_then([st](const Packet& pkt) {
    if (st.buffer.size() >= static_cast<std::size_t>(st.cap))
      return fail("network buffer overflow");
    NetState st2 = st;
    st2.buffer.push_back(pkt);
    return tcp(std::move(st2));
  });
}

// Right-nested or-chain over the emit candidates, in connection-id order.
Model emit_chain(const NetState& st, const std::vector<std::size_t>& picks, std::size_t i) {
  NetState st2{without(st.buffer, picks[i]), st.cap};
  Model this_emit = send_then(st.buffer[picks[i]], tcp(std::move(st2)));
  if (i + 1 == picks.size()) return this_emit;
  return or_model(std::move(this_emit), emit_chain(st, picks, i + 1));
}

}  // namespace

Model tcp(NetState st) {
  return Model::defer([st = std::move(st)]() -> ModelStep {
    Model absorb = absorb_branch(st);
    std::vector<std::size_t> picks = oldest_in_each_conn(st.buffer);
    if (picks.empty()) return absorb.step();
    return or_model(std::move(absorb), emit_chain(st, picks, 0)).step();
  });
}

namespace {

std::vector<Packet> pushed(std::vector<Packet> v, Packet p) {
  v.push_back(std::move(p));
  return v;
}

std::vector<Packet> popped(const std::vector<Packet>& v) {
  return std::vector<Packet>(v.begin() + 1, v.end());
}

}  // namespace

Model compose(Model net, std::vector<Packet> bi, std::vector<Packet> bo, Model srv,
              int buffer_cap) {
  return Model::defer([net = std::move(net), bi = std::move(bi), bo = std::move(bo),
                       srv = std::move(srv), buffer_cap]() -> ModelStep {
    if (bi.size() > static_cast<std::size_t>(buffer_cap) ||
        bo.size() > static_cast<std::size_t>(buffer_cap))
      return StepFail{"composition buffer overflow"};

    // Server steps take priority; the network runs only when the server is
    // blocked on an empty incoming buffer.
    ModelStep ss = srv.step();
    if (auto* send = std::get_if<StepSend>(&ss)) {
      return StepTau{compose(net, bi, pushed(bo, send->pkt), send->next, buffer_cap)};
    }
    if (auto* br = std::get_if<StepBranch>(&ss)) {
      return StepBranch{br->cond, compose(net, bi, bo, br->on_true, buffer_cap),
                        compose(net, bi, bo, br->on_false, buffer_cap)};
    }
    if (auto* fr = std::get_if<StepFresh>(&ss)) {
      SymCont k = fr->k;
      return StepFresh{fr->kind, [net, bi, bo, k, buffer_cap](SymVar v) {
                         return compose(net, bi, bo, k(v), buffer_cap);
                       }};
    }
    if (auto* f = std::get_if<StepFail>(&ss)) return StepFail{f->reason};
    if (auto* t = std::get_if<StepTau>(&ss)) {
      return StepTau{compose(net, bi, bo, t->next, buffer_cap)};
    }

    auto& srv_recv = std::get<StepRecv>(ss);
    if (!bi.empty()) {
      return StepTau{compose(net, popped(bi), bo, srv_recv.k(bi.front()), buffer_cap)};
    }

    ModelStep ns = net.step();
    if (auto* send = std::get_if<StepSend>(&ns)) {
      if (send->pkt.to_server) {
        return StepTau{compose(send->next, pushed(bi, send->pkt), bo, srv, buffer_cap)};
      }
      return StepSend{send->pkt, compose(send->next, bi, bo, srv, buffer_cap)};
    }
    if (auto* recv = std::get_if<StepRecv>(&ns)) {
      RecvCont k = recv->k;
      if (!bo.empty()) {
        return StepTau{compose(k(bo.front()), bi, popped(bo), srv, buffer_cap)};
      }
      return StepRecv{[net, bi, bo, srv, k, buffer_cap](const Packet& pkt) {
        return compose(k(pkt), bi, bo, srv, buffer_cap);
      }};
    }
    if (auto* br = std::get_if<StepBranch>(&ns)) {
      return StepBranch{br->cond, compose(br->on_true, bi, bo, srv, buffer_cap),
                        compose(br->on_false, bi, bo, srv, buffer_cap)};
    }
    if (auto* fr = std::get_if<StepFresh>(&ns)) {
      SymCont k = fr->k;
      return StepFresh{fr->kind, [bi, bo, srv, k, buffer_cap](SymVar v) {
                         return compose(k(v), bi, bo, srv, buffer_cap);
                       }};
    }
    if (auto* f = std::get_if<StepFail>(&ns)) return StepFail{f->reason};
    auto& t = std::get<StepTau>(ns);
    return StepTau{compose(t.next, bi, bo, srv, buffer_cap)};
  });
}

Model composed(Model srv) { return compose(tcp(), {}, {}, std::move(srv)); }

}  // namespace httpmbt

#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "httpmbt/derive.hpp"
#include "httpmbt/http_model.hpp"
#include "httpmbt/trace.hpp"

namespace httpmbt {

// Generation heuristics. The paper only fixes the direction of the bias
// (reuse revealed ETags, revisit known paths); the probabilities are knobs.
struct GenConfig {
  double p_put = 0.5;            // PUT vs GET
  double p_fresh_path = 0.1;     // probe an unseen path
  double p_precond = 0.5;        // attach a precondition header
  double p_observed_tag = 0.75;  // draw the tag from observed ETags
  double p_weak_flip = 0.25;     // flip the drawn tag's weakness flag
  double p_inm_on_put = 0.5;     // If-None-Match vs If-Match on PUT
  double p_origin_reply = 0.5;   // answer a forwarded message (proxy runs)
  int recent_tags = 8;           // draw from this many most recent ETags
};

// Everything the generator may read: observations shared by all branches
// plus a seed/position pair. Branch-private knowledge never reaches it, so
// branches at the same position generate identical packets.
struct GenState {
  std::vector<ETag> observed_etags;  // recency order, most recent last
  std::vector<std::string> known_paths;
  std::vector<std::uint32_t> client_pcids;
  std::vector<std::uint32_t> unanswered_forwards;  // sut-initiated pcids owing a reply
  std::uint32_t fresh_path_counter = 0;
  std::uint64_t seed = 0;
  std::uint64_t position = 0;  // external-event count
  GenConfig cfg;
};

GenState derive_gen_state(const TraceLog& trace, std::uint64_t seed, std::uint64_t position,
                          const GenConfig& cfg, const Fixture& fixture, int client_conns);

// Draws one concrete client request. Deterministic in `gs`.
HttpRequest gen_request(const GenState& gs);

// Full decision including the connection and, in proxy runs, origin replies
// to forwarded messages.
PhysPacket gen_packet(const GenState& gs);

}  // namespace httpmbt

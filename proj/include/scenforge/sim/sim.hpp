#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "scenforge/sampler/sampler.hpp"
#include "scenforge/sim/geometry.hpp"
#include "scenforge/sim/obb.hpp"
#include "scenforge/synth/synth.hpp"

namespace scenforge::sim {

inline constexpr double kTimestep = 0.1;
inline constexpr double kHorizon = 60.0;
inline constexpr int kHorizonFrames = 600;
inline constexpr double kStopDecel = 4.0;
inline constexpr double kRampDuration = 2.0;
inline constexpr double kPostCollision = 1.0;
inline constexpr double kBackgroundGap = 30.0;

struct ActorState {
  std::string id;
  double x = 0.0;
  double y = 0.0;
  double heading = 0.0;
  double speed = 0.0;
  std::string lane;
  double lat = 0.0;

  Vec2 position() const { return {x, y}; }
  bool operator==(const ActorState&) const = default;
};

struct SignalSample {
  std::string approach;
  SignalState state = SignalState::green;

  bool operator==(const SignalSample&) const = default;
};

struct Frame {
  double t = 0.0;
  std::vector<ActorState> actors;
  std::vector<SignalSample> signals;

  const ActorState& actor(std::string_view id) const;
  bool operator==(const Frame&) const = default;
};

struct CollisionEvent {
  double t = 0.0;
  std::string actor_a;
  std::string actor_b;

  bool operator==(const CollisionEvent&) const = default;
};

/// Numeric fields hold exactly what the trace file stores (6 significant
/// digits), so a trace read back from disk equals the simulated one.
struct Trace {
  std::string scenario_id;
  std::uint64_t instance_seed = 0;
  double timestep_s = kTimestep;
  double horizon_s = kHorizon;
  std::uint64_t geometry_ref = 0;
  std::vector<Frame> frames;

  bool operator==(const Trace&) const = default;
};

class DigestMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Obb footprint(const ActorState& s, const VehicleInfo& v);

Trace simulate(const synth::ScenarioTemplate& tmpl, const sampler::ScenarioInstance& instance,
               const RoadGeometry& geometry);

/// First overlapping frame of every actor pair, ordered by time then ids.
std::vector<CollisionEvent> detect_collisions(const Trace& trace, const RoadGeometry& geometry);

/// JSON Lines, one frame per line.
std::string trace_text(const Trace& trace);
std::vector<Frame> parse_trace_frames(std::string_view text);

}  // namespace scenforge::sim

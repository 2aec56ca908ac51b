#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "immerse/devices.hpp"
#include "immerse/experience.hpp"
#include "immerse/physics.hpp"
#include "immerse/sceneio.hpp"
#include "immerse/scenegraph.hpp"
#include "immerse/trace.hpp"

namespace immerse {

enum class SerialMode { Virtual, Passthrough };

struct RunConfig {
    std::string scene_path;
    std::string scenario_path;
    std::string trace_path;
    double tick_rate = 90.0;
    int sample_stride = 90;  // ticks between TransformSample batches, >= 1
    SerialMode serial = SerialMode::Virtual;
    std::string serial_path;  // passthrough target
};

struct SimOptions {
    double tick_rate = 90.0;
    int sample_stride = 90;
    SerialMode serial = SerialMode::Virtual;
    std::string serial_path;
};

// A loaded scene bound to its physics world, serial hub and scenario
// schedule. One tick = pump serial, sample devices, run scenario commands,
// run callbacks, run physics hooks, step the world, dispatch events.
class Simulation {
public:
    Simulation(const SceneDoc& scene, const ScenarioDoc& scenario, const SimOptions& options = {});

    void set_trace_sink(std::ostream* out);

    void tick_once();
    void run();  // ticks 0..N-1 plus the final boundary sample, N = run_until * rate

    SceneTree& tree() { return tree_; }
    PhysicsWorld& world() { return world_; }
    SerialHub& serial() { return serial_; }
    TraceWriter& trace() { return trace_; }

    std::int64_t tick() const { return tick_; }
    double time() const { return static_cast<double>(tick_) / rate_; }
    std::int64_t total_ticks() const { return total_ticks_; }
    double tick_rate() const { return rate_; }

    Node* find(const std::string& path) { return tree_.get_node(tree_.root(), path); }

private:
    Runtime make_runtime();
    void emit_samples();
    void dispatch_events(Runtime& rt, const std::vector<ContactEvent>& events);

    SceneTree tree_;
    PhysicsWorld world_;
    TraceWriter trace_;
    SerialHub serial_;
    DeviceTracks tracks_;
    std::vector<RoleBinding> bindings_;
    std::vector<Node*> trigger_targets_[2];
    std::map<std::int64_t, std::vector<ScenarioCmd>> trigger_schedule_;
    std::vector<std::pair<std::int64_t, Node*>> press_schedule_;
    double rate_;
    double dt_;
    int stride_;
    std::int64_t tick_ = 0;
    std::int64_t total_ticks_ = 0;
};

// Builds the scene tree and physics world from a parsed scene; behaviors are
// bound and their ready callbacks left pending for tick 0. SemanticError
// names the offending node.
std::unique_ptr<Simulation> load_world(const SceneDoc& scene, const ScenarioDoc& scenario = {},
                                       const SimOptions& options = {});

// File-level runner behind the CLI: 0 ok, 2 input error, 3 runtime error.
int run_simulation(const RunConfig& config, std::ostream& out, std::ostream& err);

}  // namespace immerse

#include "immerse/sim.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "immerse/log.hpp"
#include "parse_util.hpp"

namespace immerse {

namespace {

bool parse_vec3_param(const std::string& value, Vec3& out) {
    size_t c1 = value.find(',');
    size_t c2 = c1 == std::string::npos ? std::string::npos : value.find(',', c1 + 1);
    if (c2 == std::string::npos) return false;
    return parse_detail::parse_number(value.substr(0, c1), out.x) &&
           parse_detail::parse_number(value.substr(c1 + 1, c2 - c1 - 1), out.y) &&
           parse_detail::parse_number(value.substr(c2 + 1), out.z);
}

RigidState rigid_from_params(const BehaviorParams& params) {
    RigidState rs;
    rs.mass = param_num(params, "mass", 1.0);
    rs.angular_damping = param_num(params, "damping", 1.0);
    rs.restoring_k = param_num(params, "restoring", 0.0);
    rs.gravity_scale = param_num(params, "gravity_scale", 1.0);
    for (const auto& [k, v] : params) {
        Vec3 vec;
        if (k == "inertia") {
            if (!parse_vec3_param(v, vec)) {
                throw EngineError(Err::SemanticError, "bad inertia vector '" + v + "'");
            }
            rs.inertia = vec;
        } else if (k == "vel") {
            if (!parse_vec3_param(v, vec)) {
                throw EngineError(Err::SemanticError, "bad vel vector '" + v + "'");
            }
            rs.lin_vel = vec;
        } else if (k == "angvel") {
            if (!parse_vec3_param(v, vec)) {
                throw EngineError(Err::SemanticError, "bad angvel vector '" + v + "'");
            }
            rs.ang_vel = vec;
        }
    }
    return rs;
}

}  // namespace

Simulation::Simulation(const SceneDoc& scene, const ScenarioDoc& scenario,
                       const SimOptions& options)
    : world_(&tree_, 1.0 / options.tick_rate),
      trace_(nullptr, options.tick_rate),
      serial_(&trace_, options.tick_rate),
      rate_(options.tick_rate),
      dt_(1.0 / options.tick_rate),
      stride_(options.sample_stride > 0 ? options.sample_stride : 1) {
    if (options.serial == SerialMode::Passthrough) {
        serial_.register_passthrough("ext0", options.serial_path);
        serial_.route_virtual_to(options.serial_path);
    }

    for (const NodeDecl& decl : scene.nodes) {
        try {
            Node* parent = tree_.get_node(tree_.root(), decl.parent);
            Node* node = tree_.add_child(parent, decl.name, decl.node_kind);
            node->set_local({decl.pos, decl.rotation()});

            if (decl.body_kind) {
                if (!decl.shape) {
                    throw EngineError(Err::SemanticError, "body node needs a shape");
                }
                world_.add_body(node, *decl.body_kind, *decl.shape,
                                {decl.layer, decl.mask}, rigid_from_params(decl.params));
            } else {
                if (decl.shape) {
                    throw EngineError(Err::SemanticError, "shape on a non-body node");
                }
                if (decl.layer || decl.mask) {
                    throw EngineError(Err::SemanticError, "collision filter on a non-body node");
                }
            }

            if (decl.node_kind == NodeKind::Timer) {
                node->configure_timer(param_num(decl.params, "period", 1.0),
                                      param_num(decl.params, "one_shot", 0.0) != 0.0,
                                      param_num(decl.params, "autostart", 0.0) != 0.0);
            }

            std::string role = param_str(decl.params, "role", "");
            if (!role.empty()) {
                auto parsed = device_role_from(role);
                if (!parsed) {
                    throw EngineError(Err::SemanticError, "unknown device role '" + role + "'");
                }
                bindings_.push_back({*parsed, node});
            }

            if (!decl.behavior.empty()) {
                node->set_behavior(make_behavior(decl.behavior, decl.params));
            }
        } catch (const EngineError& e) {
            throw EngineError(Err::SemanticError, "node '" + decl.name + "': " + e.what());
        }
    }

    tracks_.build(scenario);
    if (!(scenario.run_until * rate_ <= 9.0e15)) {  // keep tick counts in exact i64 range
        throw EngineError(Err::SemanticError, "scenario run_until is out of range");
    }
    total_ticks_ = std::llround(scenario.run_until * rate_);
    for (const ScenarioCmd& cmd : scenario.commands) {
        if (cmd.type == ScenarioCmd::Type::Pose) continue;
        std::int64_t at = std::llround(cmd.t * rate_);
        if (cmd.type == ScenarioCmd::Type::Press) {
            try {
                press_schedule_.emplace_back(at, tree_.get_node(tree_.root(), cmd.path));
            } catch (const EngineError& e) {
                throw EngineError(Err::SemanticError,
                                  "scenario press target '" + cmd.path + "': " + e.what());
            }
        } else {
            trigger_schedule_[at].push_back(cmd);
        }
    }

    for (Node* n : tree_.preorder()) {
        if (!n->behavior()) continue;
        for (Hand hand : {Hand::Left, Hand::Right}) {
            if (n->behavior()->wants_trigger(hand)) {
                trigger_targets_[static_cast<int>(hand)].push_back(n);
            }
        }
    }
}

void Simulation::set_trace_sink(std::ostream* out) { trace_.set_sink(out); }

Runtime Simulation::make_runtime() {
    Runtime rt;
    rt.tree = &tree_;
    rt.world = &world_;
    rt.serial = &serial_;
    rt.trace = &trace_;
    rt.tick = tick_;
    rt.dt = dt_;
    rt.now = time();
    return rt;
}

void Simulation::emit_samples() {
    for (int i = 0; i < world_.body_count(); ++i) {
        const Body& b = world_.body(i);
        trace_.transform_sample(tree_.path_of(b.node), tree_.global_transform(b.node).pos);
    }
}

void Simulation::dispatch_events(Runtime& rt, const std::vector<ContactEvent>& events) {
    for (const ContactEvent& ev : events) {
        std::string area_path = tree_.path_of(ev.area);
        std::string other_path = tree_.path_of(ev.other);
        const char* signal = nullptr;
        switch (ev.kind) {
        case ContactEvent::Kind::AreaBodyEntered:
            trace_.area_enter(area_path, other_path);
            signal = "body_entered";
            break;
        case ContactEvent::Kind::AreaBodyExited:
            trace_.area_exit(area_path, other_path);
            signal = "body_exited";
            break;
        case ContactEvent::Kind::AreaAreaEntered:
            trace_.area_enter(area_path, other_path);
            signal = "area_entered";
            break;
        case ContactEvent::Kind::AreaAreaExited:
            trace_.area_exit(area_path, other_path);
            signal = "area_exited";
            break;
        }
        tree_.emit(rt, ev.area, signal, {ev.other});
    }
}

void Simulation::tick_once() {
    trace_.set_tick(tick_);
    serial_.set_clock(tick_, dt_);

    if (tick_ % stride_ == 0) emit_samples();

    serial_.pump(tick_);
    sample_devices(tracks_, bindings_, time());

    Runtime rt = make_runtime();
    for (const auto& [at, node] : press_schedule_) {
        if (at == tick_) tree_.emit(rt, node, "pressed", {});
    }
    if (auto triggers = trigger_schedule_.find(tick_); triggers != trigger_schedule_.end()) {
        for (const ScenarioCmd& cmd : triggers->second) {
            for (Node* target : trigger_targets_[static_cast<int>(cmd.hand)]) {
                target->behavior()->on_trigger(rt, *target, cmd.down);
            }
        }
    }

    tree_.tick_callbacks(rt);
    tree_.physics_callbacks(rt);

    std::vector<ContactEvent> events = world_.step(dt_);
    dispatch_events(rt, events);

    ++tick_;
}

void Simulation::run() {
    while (tick_ < total_ticks_) tick_once();
    trace_.set_tick(tick_);
    emit_samples();  // closing boundary sample at t = run_until
}

std::unique_ptr<Simulation> load_world(const SceneDoc& scene, const ScenarioDoc& scenario,
                                       const SimOptions& options) {
    return std::make_unique<Simulation>(scene, scenario, options);
}

namespace {

bool read_file(const std::string& path, std::string& out) {
    std::ifstream in(path, std::ios::binary);
    if (!in) return false;
    std::ostringstream ss;
    ss << in.rdbuf();
    out = ss.str();
    return true;
}

}  // namespace

int run_simulation(const RunConfig& config, std::ostream& out, std::ostream& err) {
    std::string scene_text;
    if (!read_file(config.scene_path, scene_text)) {
        err << "error: cannot read scene file '" << config.scene_path << "'\n";
        return 2;
    }
    auto scene = parse_scene(scene_text);
    if (!scene.ok()) {
        err << config.scene_path << ":" << scene.error.line << ":" << scene.error.col << ": "
            << scene.error.message << "\n";
        return 2;
    }

    std::string scenario_text;
    if (!read_file(config.scenario_path, scenario_text)) {
        err << "error: cannot read scenario file '" << config.scenario_path << "'\n";
        return 2;
    }
    auto scenario = parse_scenario(scenario_text);
    if (!scenario.ok()) {
        err << config.scenario_path << ":" << scenario.error.line << ":" << scenario.error.col
            << ": " << scenario.error.message << "\n";
        return 2;
    }

    std::ofstream trace_file;
    if (!config.trace_path.empty()) {
        trace_file.open(config.trace_path, std::ios::binary);
        if (!trace_file) {
            err << "error: cannot open trace file '" << config.trace_path << "'\n";
            return 2;
        }
    }

    SimOptions options;
    options.tick_rate = config.tick_rate;
    options.sample_stride = config.sample_stride;
    options.serial = config.serial;
    options.serial_path = config.serial_path;

    try {
        Simulation sim(*scene.doc, *scenario.doc, options);
        log_info("loaded " + std::to_string(scene.doc->nodes.size()) + " nodes, " +
                 std::to_string(sim.world().body_count()) + " bodies, " +
                 std::to_string(scenario.doc->commands.size()) + " scenario commands");
        if (trace_file.is_open()) sim.set_trace_sink(&trace_file);
        sim.run();
        log_info("finished at tick " + std::to_string(sim.tick()));
        out << "run complete: " << sim.total_ticks() << " ticks, t=" << format_fixed6(sim.time())
            << (config.trace_path.empty() ? "" : ", trace " + config.trace_path) << "\n";
        return 0;
    } catch (const EngineError& e) {
        if (e.code() == Err::SemanticError) {
            err << "error: " << e.what() << "\n";
            return 2;
        }
        err << "runtime error: " << e.what() << "\n";
        return 3;
    }
}

}  // namespace immerse

#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "immerse/math.hpp"
#include "immerse/scenegraph.hpp"

namespace immerse {

enum class BodyKind { Area, Static, Rigid, Kinematic };

const char* body_kind_name(BodyKind k);

// layer: the categories a body appears in; mask: the categories it scans.
// Bit n-1 encodes category n (categories are named 1..32).
struct CollisionFilter {
    std::uint32_t layer = 0;
    std::uint32_t mask = 0;
};

inline std::uint32_t filter_bits(std::initializer_list<int> categories) {
    std::uint32_t bits = 0;
    for (int c : categories) bits |= 1u << (c - 1);
    return bits;
}

struct Shape {
    enum class Kind { Sphere, Box };
    Kind kind = Kind::Sphere;
    double radius = 0.5;   // Sphere
    Vec3 half{0.5, 0.5, 0.5};  // Box half-extents

    static Shape sphere(double r) { return {Kind::Sphere, r, {}}; }
    static Shape box(const Vec3& half_extents) { return {Kind::Box, 0.0, half_extents}; }

    bool operator==(const Shape&) const = default;
};

struct RigidState {
    double mass = 1.0;
    Vec3 inertia{1.0, 1.0, 1.0};  // principal diagonal, kg*m^2
    Vec3 lin_vel;
    Vec3 ang_vel;
    double gravity_scale = 1.0;
    double angular_damping = 1.0;  // exponential decay rate, 1/s; 0 disables
    double restoring_k = 0.0;      // torque -k*theta_x about x; 0 disables
};

struct Body {
    Node* node = nullptr;
    BodyKind kind = BodyKind::Static;
    Shape shape;
    CollisionFilter filter;
    RigidState rigid;
    Transform pose;  // world pose, refreshed from the tree each step
};

struct ContactEvent {
    enum class Kind { AreaBodyEntered, AreaBodyExited, AreaAreaEntered, AreaAreaExited };
    Kind kind;
    Node* area = nullptr;
    Node* other = nullptr;
    std::int64_t tick = 0;
};

struct SlideResult {
    Vec3 displacement;
    bool blocked = false;
};

struct RayHit {
    int body = -1;
    Vec3 point;
    double t = 0.0;
};

// Shape-level queries. Solids are closed sets: touching counts as overlap.
bool shapes_overlap(const Shape& a, const Transform& ta, const Shape& b, const Transform& tb);

struct ContactInfo {
    Vec3 normal;   // unit, pointing from b toward a
    double depth;  // penetration along the normal, >= 0
};
std::optional<ContactInfo> shapes_contact(const Shape& a, const Transform& ta,
                                          const Shape& b, const Transform& tb);

struct Aabb {
    Vec3 min;
    Vec3 max;
    bool overlaps(const Aabb& o) const {
        return min.x <= o.max.x && max.x >= o.min.x && min.y <= o.max.y &&
               max.y >= o.min.y && min.z <= o.max.z && max.z >= o.min.z;
    }
};
Aabb shape_aabb(const Shape& s, const Transform& t);

// Fixed-timestep physics world. Exclusively owned during step(); read-only
// queries are safe between steps.
class PhysicsWorld {
public:
    static constexpr double kContactMargin = 1e-3;

    explicit PhysicsWorld(SceneTree* tree, double dt = 1.0 / 90.0) : tree_(tree), dt_(dt) {}

    double dt() const { return dt_; }
    std::int64_t tick() const { return tick_; }
    Vec3 gravity() const { return gravity_; }
    void set_gravity(const Vec3& g) { gravity_ = g; }

    int add_body(Node* node, BodyKind kind, const Shape& shape, const CollisionFilter& filter,
                 const RigidState& rigid = {});
    Body& body(int index) { return bodies_[index]; }
    const Body& body(int index) const { return bodies_[index]; }
    int body_count() const { return static_cast<int>(bodies_.size()); }
    int body_of(const Node* node) const;

    // a scans b: (a.mask intersect b.layer) nonempty. Directional.
    bool should_scan(int a, int b) const;
    // symmetric pair gate used for response and candidate generation
    bool interacts(int a, int b) const;

    // Superset of all truly overlapping, filter-passing pairs; never yields a
    // pair with interacts()==false. Pairs are (i,j) with i<j, sorted.
    std::vector<std::pair<int, int>> broadphase_pairs() const;

    // One fixed step: integrate rigids (with contact response), run queued
    // kinematic moves, recompute overlaps, diff into enter/exit events,
    // advance the tick counter. dt must equal the configured step.
    std::vector<ContactEvent> step(double dt);

    void integrate_rigid(int body, double dt);
    void apply_torque_impulse(int body, const Vec3& torque_impulse);
    SlideResult move_and_slide(int body, const Vec3& velocity, double dt);
    void queue_move(int body, const Vec3& velocity);

    std::optional<RayHit> raycast_static(const Vec3& origin, const Vec3& dir) const;

    void refresh_poses();

    // FNV-1a over node paths, transforms and rigid state; equal hashes mean
    // equal observable world state.
    std::uint64_t state_hash() const;

private:
    Body& checked_body(int index, BodyKind required);
    void write_back(Body& b, const Transform& world_pose);
    void resolve_rigid_contacts(Body& b);
    std::set<std::pair<int, int>> compute_overlaps() const;

    SceneTree* tree_;
    double dt_;
    Vec3 gravity_{0.0, -9.8, 0.0};
    std::int64_t tick_ = 0;
    std::vector<Body> bodies_;
    std::set<std::pair<int, int>> overlaps_;  // directional (area, other) pairs
    std::vector<std::pair<int, Vec3>> queued_moves_;
};

}  // namespace immerse

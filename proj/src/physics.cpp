#include "immerse/physics.hpp"

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <limits>

namespace immerse {

const char* body_kind_name(BodyKind k) {
    switch (k) {
    case BodyKind::Area: return "Area";
    case BodyKind::Static: return "Static";
    case BodyKind::Rigid: return "Rigid";
    case BodyKind::Kinematic: return "Kinematic";
    }
    return "Unknown";
}

namespace {

std::array<Vec3, 3> box_axes(const Transform& t) {
    return {t.rot.rotate({1, 0, 0}), t.rot.rotate({0, 1, 0}), t.rot.rotate({0, 0, 1})};
}

Vec3 closest_point_on_box(const Vec3& p, const Vec3& half, const Transform& t) {
    auto axes = box_axes(t);
    Vec3 d = p - t.pos;
    Vec3 out = t.pos;
    const double h[3] = {half.x, half.y, half.z};
    for (int i = 0; i < 3; ++i) {
        double dist = std::clamp(d.dot(axes[i]), -h[i], h[i]);
        out += axes[i] * dist;
    }
    return out;
}

std::optional<ContactInfo> sphere_sphere(const Vec3& ca, double ra, const Vec3& cb, double rb) {
    Vec3 d = ca - cb;
    double dist = d.length();
    double depth = ra + rb - dist;
    if (depth < 0.0) return std::nullopt;
    Vec3 n = dist > 0.0 ? d / dist : Vec3{0, 1, 0};
    return ContactInfo{n, depth};
}

// normal points from the box toward the sphere
std::optional<ContactInfo> sphere_box(const Vec3& c, double r, const Vec3& half,
                                      const Transform& tb) {
    Vec3 p = closest_point_on_box(c, half, tb);
    Vec3 d = c - p;
    double dist = d.length();
    if (dist > 0.0) {
        double depth = r - dist;
        if (depth < 0.0) return std::nullopt;
        return ContactInfo{d / dist, depth};
    }
    // center inside the box: exit through the nearest face
    auto axes = box_axes(tb);
    Vec3 local = c - tb.pos;
    const double h[3] = {half.x, half.y, half.z};
    double best = std::numeric_limits<double>::max();
    Vec3 n{0, 1, 0};
    for (int i = 0; i < 3; ++i) {
        double along = local.dot(axes[i]);
        double to_face = h[i] - std::abs(along);
        if (to_face < best) {
            best = to_face;
            n = along >= 0.0 ? axes[i] : -axes[i];
        }
    }
    return ContactInfo{n, r + best};
}

// 15-axis separating-axis test; normal points from b toward a
std::optional<ContactInfo> box_box(const Vec3& ha, const Transform& ta, const Vec3& hb,
                                   const Transform& tb) {
    auto ua = box_axes(ta);
    auto ub = box_axes(tb);
    Vec3 t = ta.pos - tb.pos;
    const double ea[3] = {ha.x, ha.y, ha.z};
    const double eb[3] = {hb.x, hb.y, hb.z};

    std::array<Vec3, 15> axes;
    int n_axes = 0;
    for (int i = 0; i < 3; ++i) axes[n_axes++] = ua[i];
    for (int i = 0; i < 3; ++i) axes[n_axes++] = ub[i];
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j) axes[n_axes++] = ua[i].cross(ub[j]);

    double best_depth = std::numeric_limits<double>::max();
    Vec3 best_normal{0, 1, 0};
    for (int k = 0; k < n_axes; ++k) {
        Vec3 axis = axes[k];
        double len_sq = axis.length_sq();
        if (len_sq < 1e-12) continue;  // parallel edges
        axis = axis / std::sqrt(len_sq);
        double ra = 0.0, rb = 0.0;
        for (int i = 0; i < 3; ++i) {
            ra += ea[i] * std::abs(ua[i].dot(axis));
            rb += eb[i] * std::abs(ub[i].dot(axis));
        }
        double dist = std::abs(t.dot(axis));
        double depth = ra + rb - dist;
        if (depth < 0.0) return std::nullopt;  // separating axis
        if (depth < best_depth) {
            best_depth = depth;
            best_normal = t.dot(axis) >= 0.0 ? axis : -axis;
        }
    }
    return ContactInfo{best_normal, best_depth};
}

}  // namespace

std::optional<ContactInfo> shapes_contact(const Shape& a, const Transform& ta, const Shape& b,
                                          const Transform& tb) {
    using K = Shape::Kind;
    if (a.kind == K::Sphere && b.kind == K::Sphere)
        return sphere_sphere(ta.pos, a.radius, tb.pos, b.radius);
    if (a.kind == K::Sphere && b.kind == K::Box)
        return sphere_box(ta.pos, a.radius, b.half, tb);
    if (a.kind == K::Box && b.kind == K::Sphere) {
        auto c = sphere_box(tb.pos, b.radius, a.half, ta);
        if (!c) return std::nullopt;
        return ContactInfo{-c->normal, c->depth};
    }
    return box_box(a.half, ta, b.half, tb);
}

bool shapes_overlap(const Shape& a, const Transform& ta, const Shape& b, const Transform& tb) {
    return shapes_contact(a, ta, b, tb).has_value();
}

Aabb shape_aabb(const Shape& s, const Transform& t) {
    if (s.kind == Shape::Kind::Sphere) {
        Vec3 r{s.radius, s.radius, s.radius};
        return {t.pos - r, t.pos + r};
    }
    auto axes = box_axes(t);
    const double h[3] = {s.half.x, s.half.y, s.half.z};
    Vec3 ext;
    for (int i = 0; i < 3; ++i) {
        ext.x += h[i] * std::abs(axes[i].x);
        ext.y += h[i] * std::abs(axes[i].y);
        ext.z += h[i] * std::abs(axes[i].z);
    }
    return {t.pos - ext, t.pos + ext};
}

// -- world ---------------------------------------------------------------

int PhysicsWorld::add_body(Node* node, BodyKind kind, const Shape& shape,
                           const CollisionFilter& filter, const RigidState& rigid) {
    if (shape.kind == Shape::Kind::Sphere && !(shape.radius > 0.0)) {
        throw EngineError(Err::SemanticError, "sphere radius must be > 0");
    }
    if (shape.kind == Shape::Kind::Box &&
        !(shape.half.x > 0.0 && shape.half.y > 0.0 && shape.half.z > 0.0)) {
        throw EngineError(Err::SemanticError, "box half-extents must be > 0");
    }
    if (filter.layer == 0) {
        throw EngineError(Err::SemanticError,
                          "body '" + node->name() + "' needs at least one layer bit");
    }
    if (kind == BodyKind::Rigid &&
        !(rigid.mass > 0.0 && rigid.inertia.x > 0.0 && rigid.inertia.y > 0.0 &&
          rigid.inertia.z > 0.0)) {
        throw EngineError(Err::SemanticError, "rigid body needs positive mass and inertia");
    }
    Body b;
    b.node = node;
    b.kind = kind;
    b.shape = shape;
    b.filter = filter;
    b.rigid = rigid;
    b.pose = tree_->global_transform(node);
    bodies_.push_back(b);
    int index = static_cast<int>(bodies_.size()) - 1;
    node->set_body_index(index);
    return index;
}

int PhysicsWorld::body_of(const Node* node) const { return node->body_index(); }

bool PhysicsWorld::should_scan(int a, int b) const {
    return (bodies_[a].filter.mask & bodies_[b].filter.layer) != 0;
}

bool PhysicsWorld::interacts(int a, int b) const {
    return should_scan(a, b) || should_scan(b, a);
}

void PhysicsWorld::refresh_poses() {
    for (auto& b : bodies_) b.pose = tree_->global_transform(b.node);
}

std::vector<std::pair<int, int>> PhysicsWorld::broadphase_pairs() const {
    struct Entry {
        double min_x;
        int idx;
    };
    int n = static_cast<int>(bodies_.size());
    std::vector<Aabb> boxes(n);
    std::vector<Entry> entries(n);
    for (int i = 0; i < n; ++i) {
        boxes[i] = shape_aabb(bodies_[i].shape, bodies_[i].pose);
        entries[i] = {boxes[i].min.x, i};
    }
    std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
        return a.min_x != b.min_x ? a.min_x < b.min_x : a.idx < b.idx;
    });

    // sweep along x, then prune by full AABB and filter
    std::vector<std::pair<int, int>> pairs;
    std::vector<int> active;
    for (const auto& e : entries) {
        active.erase(std::remove_if(active.begin(), active.end(),
                                    [&](int a) { return boxes[a].max.x < boxes[e.idx].min.x; }),
                     active.end());
        for (int a : active) {
            if (!interacts(a, e.idx)) continue;
            if (!boxes[a].overlaps(boxes[e.idx])) continue;
            pairs.emplace_back(std::min(a, e.idx), std::max(a, e.idx));
        }
        active.push_back(e.idx);
    }
    std::sort(pairs.begin(), pairs.end());
    return pairs;
}

std::set<std::pair<int, int>> PhysicsWorld::compute_overlaps() const {
    std::set<std::pair<int, int>> result;
    for (auto [i, j] : broadphase_pairs()) {
        const Body& a = bodies_[i];
        const Body& b = bodies_[j];
        if (!shapes_overlap(a.shape, a.pose, b.shape, b.pose)) continue;
        if (a.kind == BodyKind::Area && should_scan(i, j)) result.emplace(i, j);
        if (b.kind == BodyKind::Area && should_scan(j, i)) result.emplace(j, i);
    }
    return result;
}

void PhysicsWorld::write_back(Body& b, const Transform& world_pose) {
    Transform parent_global =
        b.node->parent() ? tree_->global_transform(b.node->parent()) : Transform{};
    b.node->set_local(parent_global.inverse() * world_pose);
    b.pose = world_pose;
}

Body& PhysicsWorld::checked_body(int index, BodyKind required) {
    if (index < 0 || index >= static_cast<int>(bodies_.size())) {
        throw EngineError(Err::WrongBodyKind, "node has no physics body");
    }
    Body& b = bodies_[index];
    if (b.kind != required) {
        throw EngineError(Err::WrongBodyKind, body_kind_name(b.kind));
    }
    return b;
}

void PhysicsWorld::integrate_rigid(int body, double dt) {
    Body& b = checked_body(body, BodyKind::Rigid);
    RigidState& rs = b.rigid;
    Transform pose = tree_->global_transform(b.node);

    // semi-implicit Euler
    rs.lin_vel += gravity_ * rs.gravity_scale * dt;
    pose.pos += rs.lin_vel * dt;

    if (rs.restoring_k != 0.0) {
        // spring torque about x toward the rest orientation
        double theta_x = 2.0 * std::atan2(pose.rot.x, pose.rot.w);
        rs.ang_vel.x += (-rs.restoring_k * theta_x / rs.inertia.x) * dt;
    }
    if (rs.angular_damping > 0.0) {
        rs.ang_vel *= std::exp(-rs.angular_damping * dt);
    }
    double ang = rs.ang_vel.length() * dt;
    if (ang > 0.0) {
        pose.rot = (Quat::from_axis_angle(rs.ang_vel, ang) * pose.rot).normalized();
    }

    if (!rs.lin_vel.is_finite() || !rs.ang_vel.is_finite() || !pose.pos.is_finite() ||
        !pose.rot.is_finite()) {
        throw EngineError(Err::NonFiniteState, "body '" + b.node->name() + "'");
    }
    write_back(b, pose);
}

void PhysicsWorld::resolve_rigid_contacts(Body& b) {
    // restitution-0: project out of penetration, remove approaching velocity
    int self = b.node->body_index();
    for (int j = 0; j < static_cast<int>(bodies_.size()); ++j) {
        if (j == self) continue;
        const Body& other = bodies_[j];
        if (other.kind == BodyKind::Area) continue;
        if (!interacts(self, j)) continue;
        auto ci = shapes_contact(b.shape, b.pose, other.shape, other.pose);
        if (!ci || ci->depth <= 0.0) continue;
        Transform pose = b.pose;
        pose.pos += ci->normal * ci->depth;
        double approach = b.rigid.lin_vel.dot(ci->normal);
        if (approach < 0.0) b.rigid.lin_vel -= ci->normal * approach;
        write_back(b, pose);
    }
}

void PhysicsWorld::apply_torque_impulse(int body, const Vec3& torque_impulse) {
    Body& b = checked_body(body, BodyKind::Rigid);
    b.rigid.ang_vel += Vec3{torque_impulse.x / b.rigid.inertia.x,
                            torque_impulse.y / b.rigid.inertia.y,
                            torque_impulse.z / b.rigid.inertia.z};
    if (!b.rigid.ang_vel.is_finite()) {
        throw EngineError(Err::NonFiniteState, "body '" + b.node->name() + "'");
    }
}

void PhysicsWorld::queue_move(int body, const Vec3& velocity) {
    checked_body(body, BodyKind::Kinematic);
    queued_moves_.emplace_back(body, velocity);
}

SlideResult PhysicsWorld::move_and_slide(int body, const Vec3& velocity, double dt) {
    Body& kb = checked_body(body, BodyKind::Kinematic);
    refresh_poses();

    std::vector<int> obstacles;
    for (int j = 0; j < static_cast<int>(bodies_.size()); ++j) {
        if (j == body) continue;
        BodyKind k = bodies_[j].kind;
        if (k != BodyKind::Static && k != BodyKind::Kinematic) continue;
        if (interacts(body, j)) obstacles.push_back(j);
    }

    Transform pose = kb.pose;
    const Vec3 start = pose.pos;
    Vec3 remaining = velocity * dt;
    bool blocked = false;

    auto overlaps_at = [&](const Vec3& pos, int j) {
        Transform p = pose;
        p.pos = pos;
        return shapes_overlap(kb.shape, p, bodies_[j].shape, bodies_[j].pose);
    };
    auto contact_at = [&](const Vec3& pos, int j) {
        Transform p = pose;
        p.pos = pos;
        return shapes_contact(kb.shape, p, bodies_[j].shape, bodies_[j].pose);
    };

    for (int iter = 0; iter < 4 && remaining.length_sq() > 1e-24; ++iter) {
        // bodies already in contact clip the motion to their tangent plane
        bool clipped = false;
        std::vector<int> sweep;
        for (int j : obstacles) {
            auto ci = contact_at(pose.pos, j);
            if (!ci) {
                sweep.push_back(j);
                continue;
            }
            double into = remaining.dot(ci->normal);
            if (into < -1e-15) {
                remaining -= ci->normal * into;
                blocked = true;
                clipped = true;
            }
        }
        if (clipped) continue;

        Vec3 target = pose.pos + remaining;
        bool hit = false;
        for (int j : sweep) {
            if (overlaps_at(target, j)) {
                hit = true;
                break;
            }
        }
        if (!hit) {
            pose.pos = target;
            break;
        }

        // bisect to the contact point, leaving at most a margin-sized gap
        double lo = 0.0, hi = 1.0;
        double step_len = remaining.length();
        while ((hi - lo) * step_len > kContactMargin * 0.25) {
            double mid = 0.5 * (lo + hi);
            Vec3 p = pose.pos + remaining * mid;
            bool any = false;
            for (int j : sweep) {
                if (overlaps_at(p, j)) {
                    any = true;
                    break;
                }
            }
            (any ? hi : lo) = mid;
        }

        // normal from the deepest contact just past the boundary
        Vec3 probe = pose.pos + remaining * hi;
        Vec3 normal{0, 1, 0};
        double best_depth = -1.0;
        for (int j : sweep) {
            auto ci = contact_at(probe, j);
            if (ci && ci->depth > best_depth) {
                best_depth = ci->depth;
                normal = ci->normal;
            }
        }

        pose.pos += remaining * lo;
        remaining = remaining * (1.0 - lo);
        remaining -= normal * remaining.dot(normal);
        blocked = true;
    }

    write_back(kb, pose);
    return {pose.pos - start, blocked};
}

std::vector<ContactEvent> PhysicsWorld::step(double dt) {
    if (dt != dt_) {
        throw EngineError(Err::BadStep, "step size must equal the configured fixed step");
    }
    refresh_poses();

    for (int i = 0; i < static_cast<int>(bodies_.size()); ++i) {
        if (bodies_[i].kind != BodyKind::Rigid) continue;
        integrate_rigid(i, dt);
        resolve_rigid_contacts(bodies_[i]);
    }

    for (const auto& [i, vel] : queued_moves_) {
        move_and_slide(i, vel, dt);
    }
    queued_moves_.clear();

    refresh_poses();
    std::set<std::pair<int, int>> current = compute_overlaps();

    std::vector<ContactEvent> events;
    auto make_event = [&](const std::pair<int, int>& pair, bool entered) {
        const Body& area = bodies_[pair.first];
        const Body& other = bodies_[pair.second];
        ContactEvent ev;
        ev.area = area.node;
        ev.other = other.node;
        ev.tick = tick_;
        if (other.kind == BodyKind::Area) {
            ev.kind = entered ? ContactEvent::Kind::AreaAreaEntered
                              : ContactEvent::Kind::AreaAreaExited;
        } else {
            ev.kind = entered ? ContactEvent::Kind::AreaBodyEntered
                              : ContactEvent::Kind::AreaBodyExited;
        }
        events.push_back(ev);
    };
    for (const auto& pair : current) {
        if (!overlaps_.count(pair)) make_event(pair, true);
    }
    for (const auto& pair : overlaps_) {
        if (!current.count(pair)) make_event(pair, false);
    }
    std::sort(events.begin(), events.end(), [&](const ContactEvent& a, const ContactEvent& b) {
        std::string pa = tree_->path_of(a.area);
        std::string pb = tree_->path_of(b.area);
        if (pa != pb) return pa < pb;
        return tree_->path_of(a.other) < tree_->path_of(b.other);
    });

    overlaps_ = std::move(current);
    ++tick_;
    return events;
}

std::optional<RayHit> PhysicsWorld::raycast_static(const Vec3& origin, const Vec3& dir) const {
    Vec3 d = dir.normalized();
    std::optional<RayHit> best;
    for (int i = 0; i < static_cast<int>(bodies_.size()); ++i) {
        const Body& b = bodies_[i];
        if (b.kind != BodyKind::Static) continue;
        double t = -1.0;
        if (b.shape.kind == Shape::Kind::Sphere) {
            Vec3 oc = origin - b.pose.pos;
            double h = oc.dot(d);
            double c = oc.length_sq() - b.shape.radius * b.shape.radius;
            double disc = h * h - c;
            if (disc < 0.0) continue;
            t = -h - std::sqrt(disc);
        } else {
            // slab test in the box frame
            Transform inv = b.pose.inverse();
            Vec3 o = inv.apply(origin);
            Vec3 rd = inv.rot.rotate(d);
            const double ro[3] = {o.x, o.y, o.z};
            const double rdir[3] = {rd.x, rd.y, rd.z};
            const double h[3] = {b.shape.half.x, b.shape.half.y, b.shape.half.z};
            double tmin = -std::numeric_limits<double>::max();
            double tmax = std::numeric_limits<double>::max();
            bool miss = false;
            for (int k = 0; k < 3; ++k) {
                if (std::abs(rdir[k]) < 1e-12) {
                    if (std::abs(ro[k]) > h[k]) {
                        miss = true;
                        break;
                    }
                    continue;
                }
                double t1 = (-h[k] - ro[k]) / rdir[k];
                double t2 = (h[k] - ro[k]) / rdir[k];
                if (t1 > t2) std::swap(t1, t2);
                tmin = std::max(tmin, t1);
                tmax = std::min(tmax, t2);
            }
            if (miss || tmax < std::max(tmin, 0.0)) continue;
            t = tmin;
        }
        if (t < 0.0) continue;
        if (!best || t < best->t) {
            best = RayHit{i, origin + d * t, t};
        }
    }
    return best;
}

std::uint64_t PhysicsWorld::state_hash() const {
    std::uint64_t h = 14695981039346656037ull;
    auto mix_byte = [&](unsigned char b) {
        h ^= b;
        h *= 1099511628211ull;
    };
    auto mix_double = [&](double v) {
        auto bits = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(bits >> (i * 8)));
    };
    auto mix_string = [&](const std::string& s) {
        for (char c : s) mix_byte(static_cast<unsigned char>(c));
        mix_byte(0);
    };

    for (const Node* n : tree_->preorder()) {
        mix_string(tree_->path_of(n));
        const Transform& t = n->local();
        mix_double(t.pos.x);
        mix_double(t.pos.y);
        mix_double(t.pos.z);
        mix_double(t.rot.w);
        mix_double(t.rot.x);
        mix_double(t.rot.y);
        mix_double(t.rot.z);
        mix_byte(n->visible() ? 1 : 0);
    }
    for (const Body& b : bodies_) {
        mix_byte(static_cast<unsigned char>(b.kind));
        mix_double(b.rigid.lin_vel.x);
        mix_double(b.rigid.lin_vel.y);
        mix_double(b.rigid.lin_vel.z);
        mix_double(b.rigid.ang_vel.x);
        mix_double(b.rigid.ang_vel.y);
        mix_double(b.rigid.ang_vel.z);
    }
    auto bits = static_cast<std::uint64_t>(tick_);
    for (int i = 0; i < 8; ++i) mix_byte(static_cast<unsigned char>(bits >> (i * 8)));
    return h;
}

}  // namespace immerse

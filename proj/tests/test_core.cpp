#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <random>
#include <set>

#include "ovsim/core/assignment.hpp"
#include "ovsim/core/scene.hpp"
#include "ovsim/core/types.hpp"
#include "ovsim/core/worker_set.hpp"

using namespace ovsim;

TEST_CASE("sphere inertia matches the analytic solid-sphere tensor") {
  // I = 2/5 m r^2 on the diagonal; m=2, r=0.5 gives 0.2.
  const Mat3 i = compute_inertia(Shape::sphere(0.5), 2.0);
  CHECK(i(0, 0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(i(1, 1) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(i(2, 2) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK(i(0, 1) == 0.0);
  CHECK(i(1, 2) == 0.0);
}

TEST_CASE("box inertia matches the analytic cuboid tensor") {
  // Full widths (0.2, 0.4, 0.6), m=3:
  //   Ixx = m/12 (dy^2 + dz^2) = 0.25 * 0.52 = 0.13
  //   Iyy = m/12 (dx^2 + dz^2) = 0.25 * 0.40 = 0.10
  //   Izz = m/12 (dx^2 + dy^2) = 0.25 * 0.20 = 0.05
  const Mat3 i = compute_inertia(Shape::box(Vec3(0.1, 0.2, 0.3)), 3.0);
  CHECK(i(0, 0) == doctest::Approx(0.13).epsilon(1e-14));
  CHECK(i(1, 1) == doctest::Approx(0.10).epsilon(1e-14));
  CHECK(i(2, 2) == doctest::Approx(0.05).epsilon(1e-14));
}

TEST_CASE("static bodies get a zero inertia tensor") {
  CHECK(compute_inertia(Shape::sphere(1.0), 0.0).isZero(0.0));
}

TEST_CASE("body state scalar round trip preserves layout and values") {
  BodyState s;
  s.position = Vec3(1.5, -2.25, 3.125);
  s.orientation = Quat(0.5, 0.5, 0.5, 0.5);
  s.linear_velocity = Vec3(-0.1, 0.2, -0.3);
  s.angular_velocity = Vec3(4.0, -5.0, 6.0);

  const auto a = s.to_scalars();
  CHECK(a[0] == 1.5);
  CHECK(a[3] == 0.5);   // w first
  CHECK(a[4] == 0.5);
  CHECK(a[7] == -0.1);
  CHECK(a[10] == 4.0);
  CHECK(BodyState::from_scalars(a) == s);
}

namespace {

Scene tiny_scene() {
  Scene s;
  s.num_workers = 2;
  RigidBody floor;
  floor.id = 0;
  floor.shape = Shape::static_plane(Vec3(0, 1, 0), 0.0);
  floor.mass = 0.0;
  s.bodies.push_back(floor);
  for (BodyId i = 1; i <= 3; ++i) {
    RigidBody b;
    b.id = i;
    b.shape = Shape::sphere(0.1);
    b.mass = 0.5;
    b.inertia = compute_inertia(b.shape, b.mass);
    b.inv_inertia = b.inertia.inverse();
    b.initial_state.position = Vec3(0.3 * i, 1.0, 0.0);
    b.initial_partition = i % 2;
    s.bodies.push_back(b);
  }
  return s;
}

}  // namespace

TEST_CASE("scene JSON round trip is exact to the bit for doubles") {
  Scene s = tiny_scene();
  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(-10.0, 10.0);
  for (RigidBody& b : s.bodies) {
    if (b.is_static()) continue;
    b.initial_state.position = Vec3(u(rng), u(rng), u(rng));
    Quat q(u(rng), u(rng), u(rng), u(rng));
    q.normalize();
    b.initial_state.orientation = q;
    b.initial_state.linear_velocity = Vec3(u(rng), u(rng), u(rng));
    b.initial_state.angular_velocity = Vec3(u(rng), u(rng), u(rng));
  }
  const Scene back = parse_scene(serialize_scene(s));
  CHECK(scenes_equal(s, back));
  for (std::size_t i = 0; i < s.bodies.size(); ++i)
    CHECK(s.bodies[i].initial_state == back.bodies[i].initial_state);
}

TEST_CASE("scene validation rejects broken inputs") {
  Scene s = tiny_scene();

  SUBCASE("duplicate body id") {
    s.bodies[2].id = 1;
    CHECK_THROWS_AS(parse_scene(serialize_scene(s)), ValidationError);
  }
  SUBCASE("non-unit quaternion") {
    s.bodies[1].initial_state.orientation = Quat(1.0, 0.5, 0.0, 0.0);
    CHECK_THROWS_AS(parse_scene(serialize_scene(s)), ValidationError);
  }
  SUBCASE("partition label out of range") {
    s.bodies[1].initial_partition = 5;
    CHECK_THROWS_AS(parse_scene(serialize_scene(s)), ValidationError);
  }
  SUBCASE("joint endpoint unknown") {
    JointSpec j;
    j.id = 0;
    j.body_a = 1;
    j.body_b = 99;
    s.joints.push_back(j);
    CHECK_THROWS_AS(parse_scene(serialize_scene(s)), ValidationError);
  }
  SUBCASE("dynamic plane") {
    s.bodies[0].mass = 1.0;
    CHECK_THROWS_AS(parse_scene(serialize_scene(s)), ValidationError);
  }
  SUBCASE("malformed JSON") {
    CHECK_THROWS_AS(parse_scene("{ not json"), ParseError);
  }
}

TEST_CASE("scene file save and load round trip") {
  namespace fs = std::filesystem;
  const Scene s = tiny_scene();
  const auto path = fs::temp_directory_path() / "ovsim_core_roundtrip.json";
  save_scene(s, path.string());
  CHECK(scenes_equal(s, load_scene(path.string())));
  fs::remove(path);
}

TEST_CASE("bounding box diagonal ignores planes and pads by radius") {
  Scene s = tiny_scene();
  s.bodies[1].initial_state.position = Vec3(0, 0, 0);
  s.bodies[2].initial_state.position = Vec3(3, 4, 0);
  s.bodies[3].initial_state.position = Vec3(1, 1, 0);
  // Extremes (0,0,0) and (3,4,0) padded by r=0.1 on each side:
  // diag = |(3.2, 4.2, 0.2)| .
  const double expect = Vec3(3.2, 4.2, 0.2).norm();
  CHECK(s.bounding_box_diagonal() == doctest::Approx(expect).epsilon(1e-14));
}

TEST_CASE("joint gap measures world anchor separation") {
  Scene s = tiny_scene();
  JointSpec j;
  j.id = 0;
  j.body_a = 1;
  j.body_b = 2;
  j.anchor_a = Vec3(0, -0.5, 0);
  j.anchor_b = Vec3(0, 0.5, 0);
  s.joints.push_back(j);

  std::vector<BodyState> states(s.bodies.size());
  states[1].position = Vec3(0, 1, 0);   // anchor at (0, 0.5, 0)
  states[2].position = Vec3(0, -1, 0);  // anchor at (0, -0.5, 0)
  CHECK(max_joint_gap(s, states) == doctest::Approx(1.0).epsilon(1e-15));

  // Rotating body 1 by 90 degrees about z moves its anchor to (0.5, 1, 0).
  states[1].orientation =
      Quat(Eigen::AngleAxisd(M_PI / 2.0, Vec3::UnitZ()));
  const double expect = (Vec3(0.5, 1.0, 0.0) - Vec3(0.0, -0.5, 0.0)).norm();
  CHECK(max_joint_gap(s, states) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("worker set behaves like a sorted unique set") {
  std::mt19937_64 rng(11);
  std::uniform_int_distribution<int> pick(0, 7);
  WorkerSet ws;
  std::set<WorkerId> ref;
  for (int i = 0; i < 500; ++i) {
    const WorkerId w = static_cast<WorkerId>(pick(rng));
    if (pick(rng) % 2 == 0) {
      CHECK(ws.insert(w) == ref.insert(w).second);
    } else {
      CHECK(ws.erase(w) == (ref.erase(w) > 0));
    }
    REQUIRE(ws.size() == ref.size());
    CHECK(std::vector<WorkerId>(ref.begin(), ref.end()) == ws.values());
  }
}

TEST_CASE("worker set algebra matches the reference set operations") {
  const WorkerSet a{0, 2, 3};
  const WorkerSet b{1, 3};
  CHECK(a.set_union(b).values() == std::vector<WorkerId>{0, 1, 2, 3});
  CHECK(a.set_difference(b).values() == std::vector<WorkerId>{0, 2});
  CHECK(a.intersects(b));
  CHECK_FALSE(WorkerSet{0, 2}.intersects(WorkerSet{1, 3}));
}

TEST_CASE("assignment tracks loads and the overlap set") {
  Scene s = tiny_scene();  // bodies 1..3 dynamic, partitions 1,0,1
  WorkerAssignment a = WorkerAssignment::from_scene(s);

  CHECK(a.workers_of(1).values() == std::vector<WorkerId>{1});
  CHECK(a.workers_of(2).values() == std::vector<WorkerId>{0});
  CHECK(a.worker_load(0) == 1);
  CHECK(a.worker_load(1) == 2);
  CHECK(a.overlap_set().empty());
  CHECK(a.workers_of(0).empty());  // static

  CHECK(a.activate(2, 1));
  CHECK_FALSE(a.activate(2, 1));  // already there
  CHECK(a.worker_load(1) == 3);
  CHECK(a.in_overlap(2));
  CHECK(*a.overlap_set().begin() == 2);

  a.deactivate(2, 0);
  CHECK_FALSE(a.in_overlap(2));
  CHECK(a.overlap_set().empty());
  // Removing the last worker of a body must be refused.
  CHECK_THROWS(a.deactivate(2, 1));
  // As must detaching from a worker the body is not in.
  CHECK_THROWS(a.deactivate(3, 0));
}

TEST_CASE("assignment load_of sums over a worker set") {
  Scene s = tiny_scene();
  WorkerAssignment a = WorkerAssignment::from_scene(s);
  CHECK(a.load_of(WorkerSet{0, 1}) == 3);
  CHECK(a.load_of(WorkerSet{1}) == 2);
  CHECK(a.load_of(WorkerSet{}) == 0);
}

#include <doctest.h>

#include <numbers>

#include "navstack/errors.hpp"
#include "navstack/navstack.hpp"

using namespace navstack;

namespace {

const World& office() {
  static const World w = load_world(NAVSTACK_DATA_DIR "/office.world.json");
  return w;
}

const route::TopoGraph& office_graph() {
  static const auto g = route::TopoGraph::from_world(office());
  return g;
}

spec::SpecFile office_spec_with(const std::string& extra) {
  auto s = spec::load_spec(NAVSTACK_DATA_DIR "/office.spec");
  for (auto& d : spec::parse_spec("reach2(L) = (outside(L)){*}; inside(L)\n" + extra).definitions) {
    if (s.find(d.name) == nullptr) s.define(std::move(d));
  }
  return s;
}

Controller make(const spec::SpecFile& s, const std::string& mission, std::uint64_t seed) {
  const auto domains = spec_domains(s, &office());
  std::vector<ltl::MonitorProgram> routes{compile_property(s, "sp", domains),
                                          compile_property(s, "nd", domains)};
  return Controller(office(), office_graph(), compile_conjunction(s, {"ca", "ow"}, domains),
                    std::move(routes), compile_mission_def(s, mission, office()), ControllerConfig{},
                    seed);
}

}  // namespace

TEST_CASE("G2 starts toward A") {
  const auto s = office_spec_with("");
  auto c = make(s, "mission2", 2);
  const RobotState start{91 * 0.25, 47 * 0.25, std::numbers::pi};
  const auto walls = wall_obstacles(office());
  const auto out = c.control_step(start, walls);
  REQUIRE(out.goal);
  CHECK(*out.goal == "A");
  CHECK(out.goal_changed);
  REQUIRE(out.new_route);
  CHECK(out.new_route->nodes.back() == "A");
  CHECK_FALSE(out.full_brake);
  CHECK(out.command.v > 0.0);
  CHECK(out.safe);
}

TEST_CASE("goal ties are broken by the seeded stream") {
  const auto s = office_spec_with("either = reach2(B) | reach2(D)\n");
  const RobotState start{91 * 0.25, 47 * 0.25, std::numbers::pi};
  const auto walls = wall_obstacles(office());
  std::set<std::string> seen;
  for (std::uint64_t seed = 0; seed < 16; ++seed) {
    auto a = make(s, "either", seed);
    auto b = make(s, "either", seed);
    const auto ga = a.control_step(start, walls).goal;
    const auto gb = b.control_step(start, walls).goal;
    REQUIRE(ga);
    CHECK(ga == gb);
    seen.insert(*ga);
  }
  CHECK(seen == std::set<std::string>{"B", "D"});
}

TEST_CASE("inside the goal region the robot heads for its center") {
  const auto s = office_spec_with("twice = reach2(A); reach2(A)\n");
  auto c = make(s, "twice", 0);
  const Vec2 a = office().locations.at("A").center;
  const auto out = c.control_step({a.x + 0.2, a.y, 0.0}, wall_obstacles(office()));
  REQUIRE(out.goal);
  CHECK(*out.goal == "A");
  CHECK_FALSE(out.subgoal);
  CHECK_FALSE(out.new_route);
}

TEST_CASE("a finished mission holds still") {
  const auto s = office_spec_with("once_a = reach2(A)\n");
  auto c = make(s, "once_a", 0);
  const Vec2 a = office().locations.at("A").center;
  const auto out = c.control_step({a.x, a.y, 0.0, 0.0, 0.0}, wall_obstacles(office()));
  CHECK(out.matched);
  CHECK(out.mission_finished);
  CHECK_FALSE(out.goal);
  CHECK(out.command == dwa::VelocityCommand{0.0, 0.0});
}

TEST_CASE("a mission that cannot continue is reported") {
  const auto s = office_spec_with("stay_a = (inside(A))*\n");
  auto c = make(s, "stay_a", 0);
  CHECK_THROWS_AS(c.control_step({91 * 0.25, 47 * 0.25, 0.0}, wall_obstacles(office())), DeadMission);
}

TEST_CASE("mission definitions are checked against the world") {
  const auto s = office_spec_with("nowhere = reach2(Z)\n");
  CHECK_THROWS_AS(compile_mission_def(s, "nowhere", office()), UnknownLocation);
  const auto domains = spec_domains(s, &office());
  CHECK(domains.at("location") == std::vector<std::string>{"A", "B", "C", "D"});
  CHECK(domains.at("node").size() == 19);
  CHECK_THROWS_AS(compile_property(s, "missing", domains), UndefinedName);
}

#include <catch2/catch_amalgamated.hpp>

#include "vicsim/dynamics.hpp"

using namespace vicsim;

TEST_CASE("BodyParams validation") {
  BodyParams p;
  CHECK_NOTHROW(p.validate());

  BodyParams bad = p;
  bad.mass = 0.0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = p;
  bad.inertia(0, 1) = 1e-6;  // asymmetric
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = p;
  bad.inertia = -Mat3::Identity();
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);

  bad = p;
  bad.r_end = bad.r_com;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("gravity wrench") {
  BodyParams p;
  RobotState s;
  SECTION("default 4.5 kg platform") {
    const Wrench w = gravity_wrench(p, s);
    CHECK(w.frame == Frame::World);
    CHECK(w.force.z() == Catch::Approx(-44.145).margin(1e-12));
    CHECK(w.force.head<2>().norm() == 0.0);
    CHECK(w.torque.norm() == 0.0);
  }
  SECTION("zero gravity") {
    p.mass = 1.0;
    p.gravity = 0.0;
    CHECK(gravity_wrench(p, s).force.norm() == 0.0);
  }
  SECTION("2 kg") {
    p.mass = 2.0;
    CHECK(gravity_wrench(p, s).force.z() == Catch::Approx(-19.62).margin(1e-12));
  }
}

TEST_CASE("gyroscopic wrench") {
  BodyParams p;
  RobotState s;
  SECTION("zero rates") {
    CHECK(gyroscopic_wrench(p, s).torque.norm() == 0.0);
    CHECK(gyroscopic_wrench(p, s).force.norm() == 0.0);
  }
  SECTION("isotropic inertia") {
    p.inertia = 0.7 * Mat3::Identity();
    s.ang_vel = Vec3(1.3, -2.1, 0.4);
    CHECK(gyroscopic_wrench(p, s).torque.norm() < 1e-15);
  }
  SECTION("hand-evaluated cross product") {
    p.inertia = Vec3(1, 2, 3).asDiagonal();
    s.ang_vel = Vec3(1, 1, 0);
    const Vec3 tau = gyroscopic_wrench(p, s).torque;
    CHECK((tau - Vec3(0, 0, -1)).norm() < 1e-14);
  }
}

TEST_CASE("actuator saturation and delay") {
  SECTION("zero delay passes a within-limits command through") {
    ActuatorModel m(Vec3(10, 10, 10), Vec3(5, 5, 5), 0);
    Wrench cmd{Vec3(3, -2, 1), Vec3(0.5, 0, -0.3), Frame::Body};
    const Wrench out = m.apply(cmd);
    CHECK((out.force - cmd.force).norm() == 0.0);
    CHECK((out.torque - cmd.torque).norm() == 0.0);
  }
  SECTION("FIFO delay of 2 steps, buffer prefilled with zeros") {
    ActuatorModel m(Vec3(10, 10, 10), Vec3(5, 5, 5), 2);
    Wrench cmd{Vec3(1, 0, 0), Vec3::Zero(), Frame::Body};
    CHECK(m.apply(cmd).force.norm() == 0.0);
    CHECK(m.apply(cmd).force.norm() == 0.0);
    CHECK(m.apply(cmd).force.x() == 1.0);
  }
  SECTION("componentwise clamp at enqueue") {
    ActuatorModel m(Vec3(10, 10, 10), Vec3(5, 5, 5), 0);
    const Wrench out = m.apply(Wrench{Vec3(15, 0, 0), Vec3::Zero(), Frame::Body});
    CHECK((out.force - Vec3(10, 0, 0)).norm() == 0.0);
  }
  SECTION("saturation is idempotent") {
    ActuatorModel m(Vec3(10, 10, 10), Vec3(5, 5, 5), 0);
    Rng rng(11);
    std::uniform_real_distribution<double> u(-40.0, 40.0);
    for (int i = 0; i < 100; ++i) {
      Wrench w{Vec3(u(rng), u(rng), u(rng)), Vec3(u(rng), u(rng), u(rng)), Frame::Body};
      const Wrench once = m.saturate(w);
      const Wrench twice = m.saturate(once);
      CHECK((once.force - twice.force).norm() == 0.0);
      CHECK((once.torque - twice.torque).norm() == 0.0);
    }
  }
  SECTION("world-frame commands are rejected") {
    ActuatorModel m(Vec3(10, 10, 10), Vec3(5, 5, 5), 0);
    CHECK_THROWS_AS(m.apply(Wrench::zero(Frame::World)), std::invalid_argument);
  }
  SECTION("negative delay rejected") {
    CHECK_THROWS_AS(ActuatorModel(Vec3(1, 1, 1), Vec3(1, 1, 1), -1), std::invalid_argument);
  }
}

TEST_CASE("delay line: command/output cross-correlation peaks at the delay") {
  const int delay = 8;
  ActuatorModel m(Vec3(100, 100, 100), Vec3(5, 5, 5), delay);
  Rng rng(21);
  std::normal_distribution<double> n01(0.0, 1.0);
  std::vector<double> cmd, out;
  for (int t = 0; t < 2000; ++t) {
    const double c = n01(rng);
    cmd.push_back(c);
    out.push_back(m.apply(Wrench{Vec3(c, 0, 0), Vec3::Zero(), Frame::Body}).force.x());
  }
  int best_lag = -1;
  double best = -1e300;
  for (int lag = 0; lag <= 20; ++lag) {
    double acc = 0.0;
    for (int t = lag; t < int(cmd.size()); ++t) acc += cmd[size_t(t - lag)] * out[size_t(t)];
    if (acc > best) {
      best = acc;
      best_lag = lag;
    }
  }
  CHECK(best_lag == delay);
}

TEST_CASE("hover equilibrium is a fixed point") {
  BodyParams p;
  RobotState s;
  s.position = Vec3(0.1, -0.2, 1.0);
  const Wrench hold{Vec3(0, 0, p.mass * p.gravity), Vec3::Zero(), Frame::World};
  RobotState next = s;
  for (int i = 0; i < 1000; ++i) next = step_dynamics(next, p, hold, Wrench::zero(), 0.0025);
  CHECK((next.position - s.position).norm() < 1e-12);
  CHECK(next.lin_vel.norm() < 1e-12);
  CHECK(next.ang_vel.norm() < 1e-12);
}

TEST_CASE("semi-implicit Euler velocity closed form under constant force") {
  BodyParams p;
  p.gravity = 0.0;
  RobotState s;
  const Wrench f{Vec3(2.0, 0, 0), Vec3::Zero(), Frame::World};
  const double dt = 0.0025;
  const int n = 400;
  for (int i = 0; i < n; ++i) s = step_dynamics(s, p, f, Wrench::zero(), dt);
  CHECK(s.lin_vel.x() == Catch::Approx(n * dt * 2.0 / p.mass).margin(1e-12));
}

TEST_CASE("torque impulse about a decoupled axis") {
  BodyParams p;
  p.inertia = Vec3(0.2, 0.3, 0.4).asDiagonal();
  p.gravity = 0.0;
  RobotState s;
  const double dt = 0.0025, tau = 0.5;
  s = step_dynamics(s, p, Wrench{Vec3::Zero(), Vec3(tau, 0, 0), Frame::Body}, Wrench::zero(), dt);
  CHECK(s.ang_vel.x() == Catch::Approx(tau * dt / 0.2).margin(1e-14));
  CHECK(std::abs(s.ang_vel.y()) < 1e-15);
}

TEST_CASE("angular momentum with isotropic inertia and zero torque") {
  BodyParams p;
  p.gravity = 0.0;
  RobotState s;
  s.ang_vel = Vec3(0.8, -1.1, 0.5);
  const Vec3 w0 = s.ang_vel;
  for (int i = 0; i < 10000; ++i) s = step_dynamics(s, p, Wrench::zero(), Wrench::zero(), 0.0025);
  CHECK((s.ang_vel - w0).norm() < 1e-10);
}

TEST_CASE("quaternion stays normalized over a million steps") {
  BodyParams p;
  p.gravity = 0.0;
  RobotState s;
  s.ang_vel = Vec3(1.0, 0.7, -0.4);
  for (int i = 0; i < 1000000; ++i) {
    s = step_dynamics(s, p, Wrench::zero(), Wrench::zero(), 0.0025);
    if (i % 10000 == 0) REQUIRE(std::abs(s.orientation.norm() - 1.0) < 1e-9);
  }
  CHECK(std::abs(s.orientation.norm() - 1.0) < 1e-9);
}

TEST_CASE("frame resolution round trip") {
  BodyParams p;
  p.gravity = 0.0;
  RobotState s;
  s.orientation = quat_exp(Vec3(0.3, 0.5, -0.2));
  const Vec3 f_world(1.0, -2.0, 0.5);
  const Wrench ww{f_world, Vec3::Zero(), Frame::World};
  const Wrench wb{s.rotation().transpose() * f_world, Vec3::Zero(), Frame::Body};
  const RobotState a = step_dynamics(s, p, ww, Wrench::zero(), 0.01);
  const RobotState b = step_dynamics(s, p, wb, Wrench::zero(), 0.01);
  CHECK((a.lin_vel - b.lin_vel).norm() < 1e-14);
}

TEST_CASE("non-finite inputs raise a dynamics fault") {
  BodyParams p;
  RobotState s;
  s.lin_vel.x() = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(step_dynamics(s, p, Wrench::zero(), Wrench::zero(), 0.0025), DynamicsFault);
  RobotState ok;
  Wrench bad = Wrench::zero();
  bad.force.x() = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(step_dynamics(ok, p, bad, Wrench::zero(), 0.0025), DynamicsFault);
  CHECK_THROWS_AS(step_dynamics(ok, p, Wrench::zero(), Wrench::zero(), 0.0),
                  std::invalid_argument);
}

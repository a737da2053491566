#include <doctest.h>

#include <stdexcept>

#include "spgrad/schedules.hpp"

using namespace spg;

TEST_CASE("validate_schedule accepts t_n = 100/n") {
  const auto d = validate_schedule(StepSchedule::polynomial(100.0, 1.0));
  CHECK(d.robbins_monro);
  CHECK(d.failure == ScheduleFailure::none);
}

TEST_CASE("validate_schedule rejects t_n = 1/sqrt(n) naming the square sum") {
  const auto d = validate_schedule(StepSchedule::polynomial(1.0, 0.5));
  CHECK(!d.robbins_monro);
  CHECK(d.failure == ScheduleFailure::sum_squares_infinite);
}

TEST_CASE("validate_schedule rejects t_n = 1/n^2 naming the divergence condition") {
  const auto d = validate_schedule(StepSchedule::polynomial(1.0, 2.0));
  CHECK(!d.robbins_monro);
  CHECK(d.failure == ScheduleFailure::sum_steps_finite);
}

TEST_CASE("validate_schedule edge exponents and theta") {
  CHECK(validate_schedule(StepSchedule::polynomial(1.0, 1.0)).robbins_monro);
  CHECK(validate_schedule(StepSchedule::polynomial(1.0, 0.75)).robbins_monro);
  CHECK(validate_schedule(StepSchedule::polynomial(1.0, 0.500001)).robbins_monro);
  CHECK(validate_schedule(StepSchedule::polynomial(-2.0, 1.0)).failure ==
        ScheduleFailure::theta_nonpositive);
}

TEST_CASE("constant schedules are usable for the constant-step method only") {
  const auto d = validate_schedule(StepSchedule::constant(0.01));
  CHECK(!d.robbins_monro);
  CHECK(d.usable_constant_step);
  CHECK(d.failure == ScheduleFailure::sum_squares_infinite);
  CHECK(!validate_schedule(StepSchedule::constant(0.0)).usable_constant_step);
}

TEST_CASE("step values including the shift") {
  CHECK(StepSchedule::polynomial(100.0, 1.0).step(4) == doctest::Approx(25.0));
  CHECK(StepSchedule::polynomial(1.0, 1.0, 1).step(1) == doctest::Approx(0.5));  // 1/(n+1)
  CHECK(StepSchedule::constant(0.125).step(999) == 0.125);
}

TEST_CASE("batch schedules: fixed, growth, admissibility") {
  const BatchSchedule fixed = BatchSchedule::fixed(5);
  CHECK(fixed.size(1) == 5);
  CHECK(fixed.size(1000) == 5);
  CHECK(!fixed.grows_at_least_linearly());
  CHECK_THROWS_AS(BatchSchedule::fixed(0), std::invalid_argument);

  const BatchSchedule lin = BatchSchedule::growth(1.0, 2.0);
  CHECK(lin.size(1) == 3);
  CHECK(lin.size(10) == 21);
  CHECK(lin.grows_at_least_linearly());

  const BatchSchedule super = BatchSchedule::growth(0.0, 1.0, 1.2);
  CHECK(super.grows_at_least_linearly());
  CHECK(super.size(100) >= 251);

  const BatchSchedule sub = BatchSchedule::growth(1.0, 1.0, 0.5);
  CHECK(!sub.grows_at_least_linearly());
  CHECK(BatchSchedule::growth(5.0, 0.0).size(99) == 5);  // slope 0 degenerates to fixed
  CHECK(!BatchSchedule::growth(5.0, 0.0).grows_at_least_linearly());
}

#include <doctest.h>

#include <set>

#include "faultae/dataset.hpp"
#include "test_support.hpp"

using namespace faultae;
using faultae::testing::TempDir;
using faultae::testing::write_text;

TEST_SUITE("dataset") {
  TEST_CASE("timestamps parse and format on the minute grid") {
    const Minute m = parse_minute("2018-07-08 00:11");
    CHECK(format_minute(m) == "2018-07-08 00:11");
    CHECK(parse_minute("2018-07-08T00:12") - m == 1);
    CHECK(format_minute(m + 60 * 24) == "2018-07-09 00:11");
    CHECK_THROWS_AS(parse_minute("2018-13-01 00:00"), ParseError);
    CHECK_THROWS_AS(parse_minute("yesterday"), ParseError);
  }

  TEST_CASE("sensor csv with an empty cell loads one missing marker") {
    TempDir dir("dataset");
    write_text(dir / "s.csv",
               "timestamp,a,b\n"
               "2018-04-01 00:00,1.5,2\n"
               "2018-04-01 00:01,,3\n"
               "2018-04-01 00:02,4,5\n");
    const auto log = load_sensor_csv(dir / "s.csv");
    CHECK(log.rows() == 3);
    CHECK(log.channels() == 2);
    CHECK(log.missing_count() == 1);
    CHECK(is_missing(log.values()(1, 0)));
    CHECK(log.channel_names() == std::vector<std::string>{"a", "b"});
  }

  TEST_CASE("the NaN sentinel marks a missing cell") {
    TempDir dir("dataset");
    std::string text = "timestamp,a,b\n";
    const char* rows[] = {"1,2", "3,NaN", "5,6", "7,8", "9,10"};
    for (int i = 0; i < 5; ++i) text += "2018-04-01 00:0" + std::to_string(i) + "," + rows[i] + "\n";
    write_text(dir / "s.csv", text);
    const auto log = load_sensor_csv(dir / "s.csv");
    CHECK(log.rows() == 5);
    CHECK(log.missing_count() == 1);
    CHECK(is_missing(log.values()(1, 1)));
    CHECK(log.values()(4, 1) == 10.0);
  }

  TEST_CASE("grid violations are rejected") {
    TempDir dir("dataset");
    write_text(dir / "gap.csv", "timestamp,a\n2018-04-01 00:00,1\n2018-04-01 00:02,2\n");
    CHECK_THROWS_AS(load_sensor_csv(dir / "gap.csv"), SpacingError);
    write_text(dir / "dup.csv", "timestamp,a\n2018-04-01 00:00,1\n2018-04-01 00:00,2\n");
    CHECK_THROWS_AS(load_sensor_csv(dir / "dup.csv"), DuplicateTimestampError);
    write_text(dir / "bad.csv", "timestamp,a\n2018-04-01 00:00,abc\n");
    CHECK_THROWS_AS(load_sensor_csv(dir / "bad.csv"), ParseError);
    CHECK_THROWS_AS(load_sensor_csv(dir / "absent.csv"), IoError);
  }

  TEST_CASE("fault interval rows from the pump log") {
    TempDir dir("dataset");
    write_text(dir / "f.csv",
               "start,duration_minutes\n"
               "2018-07-08 00:11,42\n"
               "2018-04-18 00:30,3111\n");
    const auto schedule = load_fault_intervals(dir / "f.csv");
    REQUIRE(schedule.intervals().size() == 2);
    // Sorted by start.
    const auto& long_fault = schedule.intervals()[0];
    CHECK(format_minute(long_fault.start) == "2018-04-18 00:30");
    CHECK(long_fault.duration_minutes == 51 * 60 + 51);
    const auto& short_fault = schedule.intervals()[1];
    CHECK(format_minute(short_fault.start) == "2018-07-08 00:11");
    CHECK(short_fault.duration_minutes == 42);

    write_text(dir / "zero.csv", "start,duration_minutes\n2018-07-08 00:11,0\n");
    CHECK_THROWS_AS(load_fault_intervals(dir / "zero.csv"), ValidationError);
    write_text(dir / "bad.csv", "start,duration_minutes\nsoon,5\n");
    CHECK_THROWS_AS(load_fault_intervals(dir / "bad.csv"), ParseError);
  }

  TEST_CASE("a 42 minute fault flags minutes 00:11 through 00:52") {
    std::vector<Minute> stamps;
    const Minute t0 = parse_minute("2018-07-08 00:00");
    for (int i = 0; i <= 60; ++i) stamps.push_back(t0 + i);
    const SensorLog log(stamps, {"a"}, Eigen::MatrixXd::Zero(61, 1));
    const FaultSchedule schedule({{parse_minute("2018-07-08 00:11"), 42}});
    const auto labels = label_samples(log, schedule);
    // Oracle: enumerate the stamps and test membership directly.
    int flagged = 0;
    for (int i = 0; i <= 60; ++i) {
      const bool expected = i >= 11 && i < 11 + 42;
      CHECK(labels[static_cast<std::size_t>(i)] == expected);
      flagged += labels[static_cast<std::size_t>(i)];
    }
    CHECK(flagged == 42);
    CHECK(labels[52]);
    CHECK_FALSE(labels[53]);
  }

  TEST_CASE("empty schedules and overlaps") {
    std::vector<Minute> stamps;
    for (int i = 0; i < 10; ++i) stamps.push_back(Minute{i});
    const SensorLog log(stamps, {"a"}, Eigen::MatrixXd::Zero(10, 1));
    const auto none = label_samples(log, FaultSchedule{});
    CHECK(std::count(none.begin(), none.end(), true) == 0);
    const auto both = label_samples(log, FaultSchedule({{Minute{2}, 3}, {Minute{3}, 3}}));
    CHECK(std::count(both.begin(), both.end(), true) == 4);  // minutes 2..5
  }

  TEST_CASE("label count equals the brute-force union on random schedules") {
    Rng rng(7);
    std::vector<Minute> stamps;
    for (int i = 0; i < 500; ++i) stamps.push_back(Minute{1000 + i});
    const SensorLog log(stamps, {"a"}, Eigen::MatrixXd::Zero(500, 1));
    for (int trial = 0; trial < 50; ++trial) {
      std::vector<FaultInterval> intervals;
      std::set<std::int64_t> minutes;
      const auto count = rng.below(6);
      for (std::uint64_t k = 0; k < count; ++k) {
        const auto start = 900 + static_cast<std::int64_t>(rng.below(700));
        const auto len = 1 + static_cast<std::int64_t>(rng.below(80));
        intervals.push_back({Minute{start}, len});
        for (auto m = start; m < start + len; ++m)
          if (m >= 1000 && m < 1500) minutes.insert(m);
      }
      const auto labels = label_samples(log, FaultSchedule(intervals));
      CHECK(static_cast<std::size_t>(std::count(labels.begin(), labels.end(), true)) == minutes.size());
      // Monotone: adding an interval never unflags.
      intervals.push_back({Minute{1200}, 10});
      const auto more = label_samples(log, FaultSchedule(intervals));
      for (std::size_t i = 0; i < labels.size(); ++i) CHECK((!labels[i] || more[i]));
    }
  }

  TEST_CASE("sensor csv round trip is bit exact") {
    TempDir dir("dataset");
    Rng rng(3);
    std::vector<Minute> stamps;
    Eigen::MatrixXd values(20, 3);
    for (int i = 0; i < 20; ++i) {
      stamps.push_back(parse_minute("2018-04-01 00:00") + i);
      for (int c = 0; c < 3; ++c) values(i, c) = rng.normal() * 1e3;
    }
    values(4, 2) = kMissing;
    const SensorLog log(stamps, {"x", "y", "z"}, values);
    write_sensor_csv(dir / "a.csv", log);
    const auto back = load_sensor_csv(dir / "a.csv");
    for (int i = 0; i < 20; ++i)
      for (int c = 0; c < 3; ++c) {
        if (i == 4 && c == 2) {
          CHECK(is_missing(back.values()(i, c)));
        } else {
          CHECK(back.values()(i, c) == values(i, c));
        }
      }
    CHECK(back.timestamps() == stamps);
  }
}

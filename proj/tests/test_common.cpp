#include <doctest.h>

#include <fstream>
#include <set>

#include "rising/common.hpp"
#include "rising/random.hpp"
#include "support.hpp"

using namespace rising;

TEST_CASE("sha256 matches published test vectors") {
  CHECK(sha256_hex(std::string_view("abc")) == "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
  CHECK(sha256_hex(std::string_view("")) == "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
}

TEST_CASE("atomic write creates parents, replaces content and leaves no temp file") {
  test_support::TempDir dir("atomic");
  const auto file = dir.path() / "a" / "b" / "out.txt";
  write_file_atomic(file, std::string_view("first"));
  write_file_atomic(file, std::string_view("second"));
  CHECK(read_text_file(file) == "second");
  CHECK(sha256_file(file) == sha256_hex(std::string_view("second")));
  int count = 0;
  for ([[maybe_unused]] const auto& e : std::filesystem::directory_iterator(file.parent_path())) ++count;
  CHECK(count == 1);
}

TEST_CASE("reading a missing file raises IoError carrying the path") {
  try {
    read_text_file("/nonexistent/definitely/missing.txt");
    FAIL("expected IoError");
  } catch (const IoError& e) {
    CHECK(e.path() == "/nonexistent/definitely/missing.txt");
  }
}

TEST_CASE("random stream is reproducible and keyed streams differ") {
  RandomStream a(42), b(42), c{42, 1}, d{42, 1}, e{42, 2};
  for (int i = 0; i < 100; ++i) CHECK(a.uniform() == b.uniform());
  const double c0 = c.uniform();
  CHECK(c0 == d.uniform());
  CHECK(c0 != e.uniform());
}

TEST_CASE("random stream samples have the expected moments") {
  RandomStream rng(7);
  const int n = 200000;
  double su = 0, sn = 0, sn2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = rng.uniform();
    CHECK_UNARY(u >= 0.0);
    CHECK_UNARY(u < 1.0);
    su += u;
    const double z = rng.normal();
    sn += z;
    sn2 += z * z;
  }
  CHECK(su / n == doctest::Approx(0.5).epsilon(0.01));
  CHECK(std::abs(sn / n) < 0.01);
  CHECK(sn2 / n == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("permutation contains every index once") {
  RandomStream rng(3);
  const auto p = rng.permutation(50);
  std::set<std::size_t> seen(p.begin(), p.end());
  CHECK(seen.size() == 50);
  CHECK(*seen.rbegin() == 49);
}

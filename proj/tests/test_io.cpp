// Copyright (c) 2026 the ddsyn authors
// SPDX-License-Identifier: Apache-2.0

#include "doctest.h"
#include "support/fixtures.hpp"

#include "ddsyn/io.hpp"

using namespace ddsyn;
using testsupport::random_matrix;

TEST_SUITE("io") {
  TEST_CASE("matrix json round trip is bit exact") {
    Rng rng(71);
    Matrix m = random_matrix(rng, 4, 3);
    m(0, 0) = 1.0 / 3.0;  // not exactly representable in decimal
    m(1, 2) = -0.0;
    io::json j = io::matrix_to_json(m);
    Matrix back = io::matrix_from_json(j, "m");
    REQUIRE(back.rows() == 4);
    REQUIRE(back.cols() == 3);
    for (int i = 0; i < 4; ++i)
      for (int c = 0; c < 3; ++c) CHECK(back(i, c) == m(i, c));
  }

  TEST_CASE("system files round trip through disk") {
    LtiSystem sys = build_power_grid(randomize_grid(PowerGridParams::nominal(), 5));
    testsupport::TempDir dir("iosys");
    std::string path = dir.file("sys.json");
    io::save_system(path, sys);
    LtiSystem back = io::load_system(path);
    CHECK((back.A - sys.A).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.B - sys.B).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.E - sys.E).cwiseAbs().maxCoeff() == 0.0);
    CHECK((back.H - sys.H).cwiseAbs().maxCoeff() == 0.0);
  }

  TEST_CASE("controller files carry optional certificates") {
    Rng rng(73);
    Controller ctrl(random_matrix(rng, 2, 4));
    ctrl.X = random_matrix(rng, 3, 3);
    ctrl.P = Matrix::Identity(4, 4);
    ctrl.alpha = 0.5;
    testsupport::TempDir dir("ioctrl");
    std::string path = dir.file("ctrl.json");
    io::save_controller(path, ctrl, 4);
    Controller back = io::load_controller(path);
    CHECK((back.F - ctrl.F).cwiseAbs().maxCoeff() == 0.0);
    REQUIRE(back.X.has_value());
    REQUIRE(back.P.has_value());
    REQUIRE(back.alpha.has_value());
    CHECK((*back.X - *ctrl.X).cwiseAbs().maxCoeff() == 0.0);
    CHECK(*back.alpha == 0.5);

    Controller bare(random_matrix(rng, 1, 3));
    std::string path2 = dir.file("bare.json");
    io::save_controller(path2, bare, 3);
    Controller back2 = io::load_controller(path2);
    CHECK_FALSE(back2.X.has_value());
    CHECK_FALSE(back2.P.has_value());
    CHECK_FALSE(back2.alpha.has_value());
  }

  TEST_CASE("malformed files raise io errors") {
    testsupport::TempDir dir("iobad");
    std::string path = dir.file("bad.json");
    io::write_text_file(path, "{ not json");
    CHECK_THROWS_AS(io::load_system(path), Error);
    CHECK_THROWS_AS(io::load_system(dir.file("missing.json")), Error);

    io::write_text_file(path, "{\"n\": 2}");
    CHECK_THROWS_AS(io::load_system(path), Error);
  }

  TEST_CASE("digests are stable and content sensitive") {
    CHECK(io::digest_hex("abc") == io::digest_hex("abc"));
    CHECK(io::digest_hex("abc") != io::digest_hex("abd"));
    CHECK(io::fnv1a64("") == 14695981039346656037ull);

    testsupport::TempDir dir("iodig");
    std::string path = dir.file("blob.txt");
    io::write_text_file(path, "payload");
    CHECK(io::file_digest(path) == io::digest_hex("payload"));
  }

  TEST_CASE("manifests land next to their outputs") {
    testsupport::TempDir dir("ioman");
    std::string out = dir.file("result.csv");
    io::write_text_file(out, "a,b\n");
    io::RunManifest man;
    man.command = "test";
    man.seed = 9;
    man.tool_version = "0.0";
    man.created_at = io::utc_timestamp_now();
    man.outputs[out] = io::file_digest(out);
    io::write_manifest(man, out);

    std::string man_path = io::manifest_path_for(out);
    CHECK(man_path == out + ".manifest.json");
    io::json j = io::json::parse(testsupport::slurp(man_path));
    CHECK(j["command"] == "test");
    CHECK(j["seed"] == 9);
    CHECK(j["outputs"].contains(out));
  }
}

/*
 * Copyright 2026 The pw2v Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <gtest/gtest.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <string>

#include "pw2v/model_io.hpp"
#include "test_util.hpp"

namespace pw2v {
namespace {

using testing::TempDir;
using testing::read_file;

struct Run {
  int code;
  std::string output;
};

Run run(const std::string& cmd) {
  Run r{-1, {}};
  FILE* p = ::popen((cmd + " 2>&1").c_str(), "r");
  if (!p) return r;
  char buf[4096];
  std::size_t n;
  while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.output.append(buf, n);
  const int status = ::pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string cli() { return PW2V_CLI_PATH; }

std::string small_flags() {
  return " -size 10 -window 3 -min-count 1 -iter 2 -sample 1e-2 -debug 0 -seed 3";
}

int free_port() {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  sockaddr_in a{};
  a.sin_family = AF_INET;
  a.sin_addr.s_addr = htonl(INADDR_LOOPBACK);
  ::bind(fd, reinterpret_cast<sockaddr*>(&a), sizeof a);
  socklen_t len = sizeof a;
  ::getsockname(fd, reinterpret_cast<sockaddr*>(&a), &len);
  ::close(fd);
  return ntohs(a.sin_port);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run(cli()).code, 2);
  const auto missing = run(cli() + " train -output x");
  EXPECT_EQ(missing.code, 2);
  EXPECT_NE(missing.output.find("-train"), std::string::npos);
  EXPECT_EQ(run(cli() + " train -train a -output b -bogus 1").code, 2);
  EXPECT_EQ(run(cli() + " frobnicate").code, 2);
  EXPECT_EQ(run(cli() + " --help").code, 0);
  EXPECT_EQ(run("PW2V_PRECISION=quad " + cli() + " train -train a -output b").code, 2);
}

TEST(Cli, UnreadableCorpusFails) {
  TempDir dir;
  const auto r = run(cli() + " train -train " + dir.file("nope.txt").string() + " -output " +
                     dir.file("m.txt").string());
  EXPECT_EQ(r.code, 1);
  EXPECT_NE(r.output.find("cannot"), std::string::npos);
}

TEST(Cli, TrainWritesModelAndReport) {
  TempDir dir;
  const auto corpus = dir.write("c.txt", testing::synthetic_corpus(100, 20, 40, 1));
  const auto r = run(cli() + " train -train " + corpus.string() + " -output " +
                     dir.file("m.bin").string() + " -binary 1 -report " +
                     dir.file("r.txt").string() + small_flags());
  ASSERT_EQ(r.code, 0) << r.output;
  const auto report = read_file(dir.file("r.txt"));
  for (const char* key : {"throughput_words_per_sec: ", "final_alpha: ", "vocab_size: ",
                          "kernel: batched", "words_processed: ", "host: "})
    EXPECT_NE(report.find(key), std::string::npos) << key;
  const auto wv = load_model(dir.file("m.bin"));
  EXPECT_EQ(wv.dim(), 10u);
  EXPECT_EQ(wv.tokens[0], "</s>");
}

TEST(Cli, ScalarAndBatchedFilesMatchIn64Bit) {
  TempDir dir;
  const auto corpus = dir.write("c.txt", testing::synthetic_corpus(80, 20, 40, 2));
  const std::string common = " train -train " + corpus.string() + small_flags() +
                             " -threads 1 -batch-size 1 -distinct-negatives 1 -binary 1";
  const std::string env = "PW2V_PRECISION=double ";
  ASSERT_EQ(run(env + cli() + common + " -kernel scalar -output " + dir.file("s.bin").string()).code, 0);
  ASSERT_EQ(run(env + cli() + common + " -kernel batched -output " + dir.file("b.bin").string()).code, 0);
  const auto s = read_file(dir.file("s.bin"));
  EXPECT_FALSE(s.empty());
  EXPECT_EQ(s, read_file(dir.file("b.bin")));
}

TEST(Cli, InProcessOneMatchesTrain) {
  TempDir dir;
  const auto corpus = dir.write("c.txt", testing::synthetic_corpus(80, 20, 40, 3));
  const std::string common = " -train " + corpus.string() + small_flags() + " -threads 1";
  ASSERT_EQ(run(cli() + " train" + common + " -output " + dir.file("a.txt").string()).code, 0);
  const auto d = run(cli() + " train-dist -inprocess 1 -sync-period 500" + common + " -output " +
                     dir.file("b.txt").string());
  ASSERT_EQ(d.code, 0) << d.output;
  EXPECT_NE(d.output.find("transport: inprocess"), std::string::npos);
  EXPECT_EQ(read_file(dir.file("a.txt")), read_file(dir.file("b.txt")));
}

TEST(Cli, SocketRanks) {
  TempDir dir;
  const auto corpus = dir.write("c.txt", testing::synthetic_corpus(80, 20, 40, 4));
  const int port = free_port();
  const auto hosts = dir.write("hosts", "127.0.0.1:" + std::to_string(port) + "\n127.0.0.1:0\n");
  auto rank_cmd = [&](int rank, const std::string& extra) {
    return cli() + " train-dist -nodes 2 -rank " + std::to_string(rank) + " -hosts " +
           hosts.string() + " -train " + corpus.string() + small_flags() + extra + " -output " +
           dir.file("m" + std::to_string(rank) + ".txt").string() + " > " +
           dir.file("log" + std::to_string(rank)).string() + " 2>&1; echo $? > " +
           dir.file("rc" + std::to_string(rank)).string();
  };
  auto both = [&](const std::string& extra0, const std::string& extra1) {
    const std::string script = "(" + rank_cmd(1, extra1) + ") & (" + rank_cmd(0, extra0) + "); wait";
    run("sh -c '" + script + "'");
    return std::pair{std::stoi(read_file(dir.file("rc0"))), std::stoi(read_file(dir.file("rc1")))};
  };
  const auto ok = both("", "");
  EXPECT_EQ(ok.first, 0) << read_file(dir.file("log0"));
  EXPECT_EQ(ok.second, 0) << read_file(dir.file("log1"));
  EXPECT_TRUE(std::filesystem::exists(dir.file("m0.txt")));
  EXPECT_NE(read_file(dir.file("log0")).find("nodes: 2"), std::string::npos);

  const auto bad = both(" -negative 3", " -negative 4");
  EXPECT_NE(bad.first, 0);
  EXPECT_NE(bad.second, 0);
  EXPECT_NE(read_file(dir.file("log0")).find("handshake"), std::string::npos);
  EXPECT_NE(read_file(dir.file("log1")).find("handshake"), std::string::npos);
}

TEST(Cli, EvalAndVocab) {
  TempDir dir;
  const auto corpus = dir.write("c.txt", testing::clustered_corpus(3, 6, 600, 10, 6));
  ASSERT_EQ(run(cli() + " train -train " + corpus.string() + small_flags() + " -output " +
                dir.file("m.txt").string()).code, 0);
  dir.write("ws.txt", "c0w0 c0w1 9\nc0w2 c1w3 1\nc1w1 c1w2 8\nc2w0 c0w3 2\nzz c0w0 5\n");
  dir.write("an.txt", ": family\nc0w0 c0w1 c1w0 c1w1\nc0w0 zz c1w0 c1w1\n");
  const auto before = read_file(dir.file("m.txt"));
  const auto e = run(cli() + " eval -model " + dir.file("m.txt").string() + " -similarity " +
                     dir.file("ws.txt").string() + " -analogy " + dir.file("an.txt").string());
  ASSERT_EQ(e.code, 0) << e.output;
  for (const char* key : {"similarity_score: ", "similarity_pairs_used: 4",
                          "similarity_pairs_skipped: 1", "analogy_accuracy: ",
                          "analogy_skipped: 1", "analogy_section.family: "})
    EXPECT_NE(e.output.find(key), std::string::npos) << key << "\n" << e.output;
  EXPECT_EQ(read_file(dir.file("m.txt")), before);

  dir.write("garbage.txt", "not a model\n");
  EXPECT_EQ(run(cli() + " eval -model " + dir.file("garbage.txt").string() + " -similarity " +
                dir.file("ws.txt").string()).code, 1);

  const auto v = run(cli() + " vocab -train " + corpus.string() + " -min-count 1 -output " +
                     dir.file("v.tsv").string());
  ASSERT_EQ(v.code, 0) << v.output;
  EXPECT_NE(v.output.find("vocab_size: 19"), std::string::npos) << v.output;
}

}  // namespace
}  // namespace pw2v

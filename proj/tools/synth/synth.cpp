#include "synth.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <stdexcept>

#include <json.hpp>

namespace logqa::synth {
namespace {

using Rng = std::mt19937_64;

struct Candidate {
  std::string type;
  std::string question;
  std::string answer;
};

struct Event {
  std::string line;
  std::vector<Candidate> qa;
};

std::size_t pick(Rng& rng, std::size_t n) { return static_cast<std::size_t>(rng() % n); }
long range(Rng& rng, long lo, long hi) { return lo + static_cast<long>(rng() % static_cast<std::uint64_t>(hi - lo + 1)); }
bool chance(Rng& rng, double p) { return static_cast<double>(rng() >> 11) * 0x1.0p-53 < p; }

template <typename T>
const T& choose(Rng& rng, const std::vector<T>& v) { return v[pick(rng, v.size())]; }

std::string num(long v) { return std::to_string(v); }

std::string fixed1(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", v);
  return buf;
}

// ---- HDFS ----

std::string hdfs_ip(Rng& rng) {
  return "10.251." + num(range(rng, 25, 127)) + "." + num(range(rng, 2, 254));
}

std::string block_id(Rng& rng) {
  std::string digits = num(range(rng, 1, 9));
  const auto len = range(rng, 17, 18);
  for (long i = 0; i < len; ++i) digits += static_cast<char>('0' + pick(rng, 10));
  return std::string("blk_") + (chance(rng, 0.5) ? "-" : "") + digits;
}

std::vector<Event> hdfs_events(Rng& rng, std::size_t n_logs) {
  std::vector<Event> ev;
  while (ev.size() < n_logs) {
    const auto blk = block_id(rng);
    const auto size = chance(rng, 0.75) ? std::string("67108864") : num(range(rng, 1024, 67108863));
    const long task = range(rng, 1, 1600);
    char part[16];
    std::snprintf(part, sizeof part, "%05ld", task);
    const std::string path = "/user/root/rand/_temporary/_task_200811092030_0001_m_" +
                             std::string(part + 1) + "_0/part-" + part;
    std::vector<std::string> nodes;
    for (int i = 0; i < 3; ++i) nodes.push_back(hdfs_ip(rng));

    if (chance(rng, 0.35))
      ev.push_back({"BLOCK* NameSystem.allocateBlock: " + path + ". " + blk,
                    {{"what", "What block did NameSystem allocate for " + path + "?", blk}}});
    const int replicas = chance(rng, 0.8) ? 3 : 2;
    for (int r = 0; r < replicas; ++r) {
      const auto& src = nodes[static_cast<std::size_t>(r)];
      const auto& dst = nodes[static_cast<std::size_t>((r + 1) % 3)];
      const auto port = num(range(rng, 30000, 60999));
      if (chance(rng, 0.8))
        ev.push_back({"Receiving block " + blk + " src: /" + src + ":" + port + " dest: /" + dst + ":50010",
                      {{"what", "What is the block that is receiving from " + src + ":" + port + "?", blk},
                       {"where", "Where is block " + blk + " being received from?", "/" + src + ":" + port},
                       {"where", "Where is block " + blk + " sent to?", "/" + dst + ":50010"}}});
      if (chance(rng, 0.8))
        ev.push_back({"Received block " + blk + " of size " + size + " from /" + src,
                      {{"what", "What is the size of block " + blk + "?", size},
                       {"what", "What block of size " + size + " was received from " + src + "?", blk},
                       {"where", "Where was block " + blk + " received from?", "/" + src}}});
      if (chance(rng, 0.8)) {
        const auto responder = "PacketResponder " + num(r);
        ev.push_back({responder + " for block " + blk + " terminating",
                      {{"what", "What terminated block " + blk + "?", responder},
                       {"what", "What is the state of " + responder + " for block " + blk + "?", "terminating"}}});
      }
      if (chance(rng, 0.75))
        ev.push_back({"BLOCK* NameSystem.addStoredBlock: blockMap updated: " + dst + ":50010 is added to " + blk + " size " + size,
                      {{"what", "What is the size of block " + blk + " added to the blockMap?", size},
                       {"where", "Where was block " + blk + " stored?", dst + ":50010"}}});
    }
    if (chance(rng, 0.15))
      ev.push_back({"Verification succeeded for " + blk,
                    {{"what", "What is the status of block " + blk + "?", "succeeded"},
                     {"what", "What is the verification result of " + blk + "?", "succeeded"}}});
    if (chance(rng, 0.12)) {
      const auto served = hdfs_ip(rng);
      ev.push_back({nodes[0] + ":50010 Served block " + blk + " to /" + served,
                    {{"what", "What served block " + blk + "?", nodes[0] + ":50010"},
                     {"where", "Where was block " + blk + " served to?", "/" + served}}});
    }
    if (chance(rng, 0.1)) {
      const auto file = "/mnt/hadoop/dfs/data/current/subdir" + num(range(rng, 0, 63)) + "/" + blk;
      ev.push_back({"Deleting block " + blk + " file " + file,
                    {{"what", "What file is deleted for block " + blk + "?", file}}});
      ev.push_back({"BLOCK* NameSystem.delete: " + blk + " is added to invalidSet of " + nodes[1] + ":50010",
                    {{"where", "Where is block " + blk + " added to invalidSet?", nodes[1] + ":50010"}}});
    }
  }
  return ev;
}

// ---- OpenSSH ----

std::string public_ip(Rng& rng) {
  return num(range(rng, 5, 223)) + "." + num(range(rng, 0, 255)) + "." + num(range(rng, 0, 255)) +
         "." + num(range(rng, 1, 254));
}

const std::vector<std::string> kUsers{"root",  "admin",    "test",   "oracle",  "guest",  "ubuntu",
                                      "pi",    "user",     "git",    "postgres", "support", "ftpuser",
                                      "nagios", "webmaster", "mysql", "fztu",    "ts3",    "hadoop",
                                      "zabbix", "jenkins"};

std::vector<Event> openssh_events(Rng& rng, std::size_t n_logs) {
  std::vector<Event> ev;
  while (ev.size() < n_logs) {
    const auto ip = public_ip(rng);
    if (chance(rng, 0.12)) {
      const auto& user = choose(rng, kUsers);
      const auto port = num(range(rng, 1024, 65535));
      ev.push_back({"Accepted password for " + user + " from " + ip + " port " + port + " ssh2",
                    {{"who", "Who was accepted with a password from " + ip + "?", user},
                     {"what", "What port was accepted for " + user + " from " + ip + "?", port}}});
      ev.push_back({"pam_unix(sshd:session): session opened for user " + user + " by (uid=0)", {}});
      continue;
    }
    if (chance(rng, 0.3)) {
      const auto host = "host-" + num(range(rng, 10, 250)) + "-" + num(range(rng, 10, 250)) + ".example.net";
      ev.push_back({"reverse mapping checking getaddrinfo for " + host + " [" + ip + "] failed - POSSIBLE BREAK-IN ATTEMPT!",
                    {{"what", "What host did the reverse mapping check for " + ip + "?", host}}});
    }
    const bool invalid = chance(rng, 0.4);
    const auto& user = invalid ? choose(rng, kUsers) : kUsers[0];
    if (invalid) {
      ev.push_back({"Invalid user " + user + " from " + ip,
                    {{"what", "What invalid user logged in from " + ip + "?", user},
                     {"what", "What is the address of invalid user " + user + "?", ip}}});
      ev.push_back({"input_userauth_request: invalid user " + user + " [preauth]", {}});
      ev.push_back({"pam_unix(sshd:auth): check pass; user unknown", {}});
    }
    ev.push_back({"pam_unix(sshd:auth): authentication failure; logname= uid=0 euid=0 tty=ssh ruser= rhost=" + ip +
                      (invalid ? "" : "  user=" + user),
                  {}});
    const long attempts = range(rng, 1, 5);
    for (long a = 0; a < attempts; ++a) {
      const auto port = num(range(rng, 1024, 65535));
      const auto who = invalid ? "invalid user " + user : user;
      std::vector<Candidate> qa{
          {"what", "What port did " + user + " use from " + ip + " when the password failed?", port},
          {"what", "What user failed password from " + ip + " port " + port + "?", user},
          {"did", "Did the password for " + user + " from " + ip + " port " + port + " fail?", "Failed"}};
      if (invalid) qa.push_back({"what", "What is the invalid user from " + ip + " port " + port + "?", user});
      ev.push_back({"Failed password for " + who + " from " + ip + " port " + port + " ssh2", qa});
    }
    if (attempts > 1 && chance(rng, 0.6)) {
      const auto more = num(attempts - 1);
      ev.push_back({"PAM " + more + " more authentication failures; logname= uid=0 euid=0 tty=ssh ruser= rhost=" + ip +
                        (invalid ? "" : "  user=" + user),
                    {{"how many", "How many more authentication failures came from rhost=" + ip + "?", more}}});
    }
    if (chance(rng, 0.7))
      ev.push_back({"Received disconnect from " + ip + ": 11: Bye Bye [preauth]",
                    {{"what", "What is the disconnect code from " + ip + "?", "11"}}});
    else
      ev.push_back({"Connection closed by " + ip + " [preauth]", {}});
  }
  return ev;
}

// ---- Spark ----

std::vector<Event> spark_events(Rng& rng, std::size_t n_logs) {
  std::vector<Event> ev;
  long tid = range(rng, 0, 40);
  long broadcast = 0;
  long stage = 0;
  long rdd = 2;
  double free_kb = 380.0 + static_cast<double>(range(rng, 0, 400)) / 10.0;
  ev.push_back({"Successfully registered with driver", {}});
  ev.push_back({"Changing view acls to: yarn,curi", {}});
  while (ev.size() < n_logs) {
    const long tasks = range(rng, 2, 6);
    const long var = broadcast++;
    const auto took = num(range(rng, 5, 60));
    const auto piece = fixed1(static_cast<double>(range(rng, 20, 260)) / 10.0);
    const auto whole = fixed1(static_cast<double>(range(rng, 30, 400)) / 10.0);
    free_kb = std::max(20.0, free_kb - static_cast<double>(range(rng, 5, 30)) / 2.0);
    const auto free1 = fixed1(free_kb);
    const auto free2 = fixed1(free_kb - 4.0);
    const auto v = num(var);

    for (long t = 0; t < tasks && ev.size() < n_logs; ++t, ++tid) {
      ev.push_back({"Got assigned task " + num(tid), {}});
      ev.push_back({"Running task " + num(t) + ".0 in stage " + num(stage) + ".0 (TID " + num(tid) + ")", {}});
    }
    ev.push_back({"Started reading broadcast variable " + v,
                  {{"is", "Is broadcast variable " + v + " started reading?", "Started"}}});
    ev.push_back({"Block broadcast_" + v + "_piece0 stored as bytes in memory (estimated size " + piece + " KB, free " + free1 + " KB)",
                  {{"what", "What is the estimated size of broadcast_" + v + "_piece0?", piece},
                   {"how large", "How large is the block broadcast_" + v + "_piece0?", piece + " KB"}}});
    ev.push_back({"Reading broadcast variable " + v + " took " + took + " ms",
                  {{"how many", "How many ms did it take to read the broadcast variable " + v + "?", took},
                   {"how long", "How long did reading broadcast variable " + v + " take?", took + " ms"}}});
    ev.push_back({"Block broadcast_" + v + " stored as values in memory (estimated size " + whole + " KB, free " + free2 + " KB)",
                  {{"what", "What is the estimated size of the block broadcast_" + v + "?", whole},
                   {"what", "What is the free memory after storing broadcast_" + v + "?", free2}}});
    if (chance(rng, 0.4)) {
      const auto shuffle_id = num(stage);
      const auto total = range(rng, 2, 40);
      const auto nonempty = num(range(rng, 1, total));
      const auto fetches = num(range(rng, 0, 8));
      const auto fetch_ms = num(range(rng, 1, 30));
      ev.push_back({"Updating epoch to " + num(stage + 1) + " and clearing cache", {}});
      ev.push_back({"Don't have map outputs for shuffle " + shuffle_id + ", fetching them",
                    {{"is", "Is the map output for shuffle " + shuffle_id + " available?", "Don't have"}}});
      ev.push_back({"Getting " + nonempty + " non-empty blocks out of " + num(total) + " blocks",
                    {{"how many", "How many non-empty blocks were there out of " + num(total) + " blocks?", nonempty}}});
      ev.push_back({"Started " + fetches + " remote fetches in " + fetch_ms + " ms",
                    {{"how many", "How many remote fetches were started in " + fetch_ms + " ms?", fetches}}});
    }
    for (long t = 0; t < tasks && ev.size() < n_logs; ++t) {
      const auto part = "rdd_" + num(rdd) + "_" + num(t);
      if (chance(rng, 0.5))
        ev.push_back({"Found block " + part + " locally",
                      {{"is", "Is the block " + part + " found locally?", "Found"}}});
      else
        ev.push_back({"Partition " + part + " not found, computing it",
                      {{"is", "Is partition " + part + " found?", "not found"}}});
      const auto bytes = num(range(rng, 900, 3000));
      const auto task = num(t) + ".0";
      ev.push_back({"Finished task " + task + " in stage " + num(stage) + ".0 (TID " + num(tid - tasks + t) + "). " + bytes + " bytes result sent to driver",
                    {{"how many", "How many bytes result did task " + task + " in stage " + num(stage) + ".0 send to driver?", bytes}}});
    }
    ++stage;
    rdd += chance(rng, 0.3) ? 1 : 0;
  }
  return ev;
}

struct Profile {
  std::vector<Event> (*events)(Rng&, std::size_t);
  std::vector<std::pair<std::string, double>> types;
  std::size_t qa_count;
};

const std::map<std::string, Profile, std::less<>>& profiles() {
  static const std::map<std::string, Profile, std::less<>> p{
      {"HDFS", {hdfs_events, {{"what", 0.883}, {"where", 0.117}}, 247}},
      {"OpenSSH", {openssh_events, {{"what", 0.92}, {"did", 0.059}, {"who", 0.011}, {"how many", 0.011}}, 188}},
      {"Spark",
       {spark_events,
        {{"how many", 0.486}, {"what", 0.27}, {"is", 0.189}, {"how large", 0.028}, {"how long", 0.02}},
        397}}};
  return p;
}

const Profile& profile(std::string_view name) {
  auto it = profiles().find(name);
  if (it == profiles().end()) throw std::invalid_argument("unknown dataset: " + std::string(name));
  return it->second;
}

}  // namespace

const std::vector<std::string>& dataset_names() {
  static const std::vector<std::string> names{"HDFS", "OpenSSH", "Spark"};
  return names;
}

std::size_t default_qa_count(std::string_view name) { return profile(name).qa_count; }

SynthDataset generate(std::string_view name, std::uint64_t seed, std::size_t n_logs,
                      std::size_t n_qa) {
  const auto& prof = profile(name);
  if (n_qa == 0) n_qa = prof.qa_count;
  Rng rng(seed);
  auto events = prof.events(rng, n_logs);
  events.resize(n_logs);

  SynthDataset out;
  out.name = std::string(name);
  for (const auto& e : events) out.logs.push_back(e.line);

  // Candidate (event, option) pairs per question type.
  std::map<std::string, std::vector<std::pair<std::size_t, std::size_t>>> by_type;
  for (std::size_t i = 0; i < events.size(); ++i)
    for (std::size_t j = 0; j < events[i].qa.size(); ++j) by_type[events[i].qa[j].type].emplace_back(i, j);

  std::set<std::string> questions;
  std::set<std::size_t> used_logs;
  std::size_t guard = 0;
  while (out.qa.size() < n_qa) {
    if (++guard > 100 * n_qa) throw std::runtime_error("synth: not enough distinct questions");
    double u = static_cast<double>(rng() >> 11) * 0x1.0p-53, acc = 0.0;
    std::string type = prof.types.back().first;
    for (const auto& [t, w] : prof.types) {
      acc += w;
      if (u < acc) {
        type = t;
        break;
      }
    }
    const auto& pool = by_type[type];
    if (pool.empty()) continue;
    const auto [i, j] = pool[pick(rng, pool.size())];
    const auto& c = events[i].qa[j];
    if (used_logs.count(i) || !questions.insert(c.question).second) continue;
    used_logs.insert(i);
    out.qa.push_back({c.type, c.question, c.answer, events[i].line});
  }
  return out;
}

std::string SynthDataset::qa_jsonl() const {
  std::string out;
  for (const auto& r : qa) {
    nlohmann::ordered_json j;
    j["question"] = r.question;
    j["answer"] = r.answer;
    j["log"] = r.log;
    out += j.dump() + "\n";
  }
  return out;
}

void write_dataset(const SynthDataset& data, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  std::ofstream logs(dir / (data.name + "_2k.log"), std::ios::binary);
  for (const auto& l : data.logs) logs << l << '\n';
  std::ofstream qa(dir / (data.name + "_qa.jsonl"), std::ios::binary);
  qa << data.qa_jsonl();
  if (!logs || !qa) throw std::runtime_error("synth: cannot write to " + dir.string());
}

}  // namespace logqa::synth

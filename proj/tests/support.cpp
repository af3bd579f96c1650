#include "support.hpp"

#include <random>

namespace logqa::support {

Corpus hdfs_toy_corpus() {
  return Corpus("HDFS", {
                            "Received block blk_5142679 of size 67108864 from /10.251.70.211",
                            "Verification succeeded for blk_5142679",
                            "PacketResponder 1 for block blk_5142679 terminating",
                            "Receiving block blk_7701 src: /10.251.123.132:57542 dest: /10.251.123.132:50010",
                            "Received block blk_8812 of size 3542 from /10.251.31.5",
                            "PacketResponder 2 for block blk_8812 terminating",
                            "Deleting block blk_9001 file /mnt/hadoop/dfs/data/current/subdir4/blk_9001",
                            "Verification succeeded for blk_7701",
                        });
}

std::filesystem::path scratch_dir(const std::string& name) {
  std::random_device rd;
  auto dir = std::filesystem::temp_directory_path() /
             ("logqa-test-" + name + "-" + std::to_string(rd()));
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace logqa::support

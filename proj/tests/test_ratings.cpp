#include <sstream>

#include "doctest.h"
#include "simeval/error.hpp"
#include "simeval/ratings.hpp"

using namespace simeval;

TEST_CASE("parse_csv quoting") {
  std::istringstream in("a,b,c\r\n\"x, y\",\"he said \"\"hi\"\"\",\"two\nlines\"\n,,\nlast");
  const auto rows = parse_csv(in);
  REQUIRE(rows.size() == 4);
  CHECK(rows[0] == std::vector<std::string>{"a", "b", "c"});
  CHECK(rows[1] == std::vector<std::string>{"x, y", "he said \"hi\"", "two\nlines"});
  CHECK(rows[2] == std::vector<std::string>{"", "", ""});
  CHECK(rows[3] == std::vector<std::string>{"last"});

  std::istringstream unterminated("a,\"open\n");
  CHECK_THROWS_AS(parse_csv(unterminated), ParseError);
}

TEST_CASE("csv_escape round-trips through parse_csv") {
  const std::vector<std::string> fields{"plain", "com,ma", "quo\"te", "new\nline", ""};
  std::string line;
  for (std::size_t i = 0; i < fields.size(); ++i) line += (i ? "," : "") + csv_escape(fields[i]);
  std::istringstream in(line + "\n");
  const auto rows = parse_csv(in);
  REQUIRE(rows.size() == 1);
  CHECK(rows[0] == fields);
  CHECK(csv_escape("plain") == "plain");
}

TEST_CASE("load_ratings") {
  std::istringstream in(
      "item_id,input,output,simplicity,fluency,adequacy,sari,bleu\n"
      "1,\"A long, winding input.\",Short.,62.5,70,80,35.2,0.4\n"
      "2,In.,Out.,40,,55,30,\n");
  const auto items = load_ratings(in);
  REQUIRE(items.size() == 2);
  CHECK(items[0].item_id == "1");
  CHECK(items[0].input_text == "A long, winding input.");
  CHECK(items[0].simplicity == 62.5);
  CHECK(*items[0].fluency == 70.0);
  CHECK(*items[0].metric_scores.at("sari") == 35.2);
  CHECK_FALSE(items[1].fluency);
  CHECK(*items[1].adequacy == 55.0);
  CHECK_FALSE(items[1].metric_scores.at("bleu"));

  std::istringstream bad_header("id,input,output,simplicity,fluency,adequacy\n1,a,b,1,2,3\n");
  CHECK_THROWS_AS(load_ratings(bad_header), ParseError);
  std::istringstream no_simplicity("item_id,input,output,simplicity,fluency,adequacy\n1,a,b,,2,3\n");
  CHECK_THROWS_AS(load_ratings(no_simplicity), ValidationError);
  std::istringstream short_row("item_id,input,output,simplicity,fluency,adequacy\n1,a,b,4\n");
  CHECK_THROWS_AS(load_ratings(short_row), ParseError);
  std::istringstream not_number("item_id,input,output,simplicity,fluency,adequacy\n1,a,b,high,2,3\n");
  CHECK_THROWS_AS(load_ratings(not_number), ParseError);
  std::istringstream dup("item_id,input,output,simplicity,fluency,adequacy\n1,a,b,1,2,3\n1,a,b,1,2,3\n");
  CHECK_THROWS_AS(load_ratings(dup), ParseError);

  CHECK_THROWS_AS(load_ratings(std::filesystem::path("/nonexistent/ratings.csv")), IoError);
}

TEST_CASE("bundled sample ratings load") {
  const auto items = load_ratings(std::filesystem::path(SIMEVAL_DATA_DIR) / "sample_ratings.csv");
  REQUIRE(items.size() == 12);
  CHECK(items[6].output_text == "Later, parliament changed the law.");
  for (const auto& item : items) CHECK(item.metric_scores.size() == 2);
}

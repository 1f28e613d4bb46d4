"""
Unit tests for database module.

Tests registry initialization, connection management, query execution and
run recording.
"""

import unittest
import os
import sqlite3
import tempfile
import shutil

import sys
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

import database


class TestDatabase(unittest.TestCase):
    """Test cases for registry operations."""

    def setUp(self):
        """Set up test fixtures."""
        # Create a temporary directory for the test registry
        self.test_dir = tempfile.mkdtemp()
        self.original_db_path = database.DB_PATH
        database.DB_PATH = os.path.join(self.test_dir, "test_runs.db")
        database.DB_DIR = self.test_dir

    def tearDown(self):
        """Clean up after tests."""
        database.DB_PATH = self.original_db_path
        database.DB_DIR = "data"
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_init_database_creates_directory(self):
        """Test that init_database creates the registry directory if it doesn't exist."""
        if os.path.exists(self.test_dir):
            shutil.rmtree(self.test_dir)

        result = database.init_database()
        self.assertTrue(result)
        self.assertTrue(os.path.exists(self.test_dir))
        self.assertTrue(os.path.exists(database.DB_PATH))

    def test_init_database_creates_runs_table(self):
        database.init_database()

        conn = database.get_connection()
        cursor = conn.cursor()
        cursor.execute("SELECT name FROM sqlite_master WHERE type='table' AND name = 'runs'")
        tables = [row[0] for row in cursor.fetchall()]
        conn.close()

        self.assertEqual(tables, ['runs'])

    def test_get_connection_row_factory(self):
        """Test that connection uses Row factory for column access by name."""
        database.init_database()
        conn = database.get_connection()
        self.assertIsInstance(conn, sqlite3.Connection)
        cursor = conn.cursor()
        cursor.execute("INSERT INTO runs (command, seed, config_json) VALUES (?, ?, ?)", ("ingest", 1, "{}"))
        conn.commit()
        cursor.execute("SELECT * FROM runs WHERE command = ?", ("ingest",))
        row = cursor.fetchone()
        conn.close()

        self.assertEqual(row['command'], "ingest")
        self.assertEqual(row['seed'], 1)

    def test_execute_query_returns_row_id(self):
        database.init_database()
        first = database.execute_query("INSERT INTO runs (command, config_json) VALUES (?, ?)", ("a", "{}"))
        second = database.execute_query("INSERT INTO runs (command, config_json) VALUES (?, ?)", ("b", "{}"))
        self.assertEqual(second, first + 1)

    def test_fetch_one_missing(self):
        database.init_database()
        self.assertIsNone(database.fetch_one("SELECT * FROM runs WHERE run_id = ?", (999,)))

    def test_fetch_all_returns_list_of_dicts(self):
        database.init_database()
        for command in ("ingest", "correlate", "spectrum"):
            database.execute_query("INSERT INTO runs (command, config_json) VALUES (?, ?)", (command, "{}"))

        results = database.fetch_all("SELECT * FROM runs ORDER BY run_id")

        self.assertEqual(len(results), 3)
        self.assertIsInstance(results[0], dict)
        self.assertEqual(results[2]['command'], "spectrum")

    def test_fetch_all_bad_query_returns_empty(self):
        database.init_database()
        self.assertEqual(database.fetch_all("SELECT * FROM no_such_table"), [])


class TestRunRegistry(unittest.TestCase):
    """Test cases for record_run and recent_runs."""

    def setUp(self):
        self.test_dir = tempfile.mkdtemp()
        self.original_db_path = database.DB_PATH
        database.DB_PATH = os.path.join(self.test_dir, "test_runs.db")
        database.DB_DIR = self.test_dir

    def tearDown(self):
        database.DB_PATH = self.original_db_path
        database.DB_DIR = "data"
        shutil.rmtree(self.test_dir, ignore_errors=True)

    def test_record_run(self):
        run_id = database.record_run("pipeline", {"seed": 42, "n_runs": 50}, "out", {"k": 6})
        self.assertIsNotNone(run_id)

        row = database.fetch_one("SELECT * FROM runs WHERE run_id = ?", (run_id,))
        self.assertEqual(row['command'], "pipeline")
        self.assertEqual(row['seed'], 42)
        self.assertEqual(row['output_dir'], "out")

    def test_recent_runs_newest_first(self):
        for seed in range(3):
            database.record_run("cluster", {"seed": seed}, "out", {"k": seed + 1})

        runs = database.recent_runs(limit=2)

        self.assertEqual(len(runs), 2)
        self.assertEqual(runs[0]['seed'], 2)
        self.assertEqual(runs[0]['headline'], {"k": 3})
        self.assertNotIn('headline_json', runs[0])

    def test_recent_runs_empty(self):
        self.assertEqual(database.recent_runs(), [])

    def test_get_run_decodes_json(self):
        run_id = database.record_run("cluster", {"seed": 5, "gamma": 1.0}, "out", {"k": 2})
        run = database.get_run(run_id)
        self.assertEqual(run['config'], {"seed": 5, "gamma": 1.0})
        self.assertEqual(run['headline'], {"k": 2})
        self.assertNotIn('config_json', run)
        self.assertIsNone(database.get_run(run_id + 1))


if __name__ == '__main__':
    unittest.main()

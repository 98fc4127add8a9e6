"""時間積分エンジン: 正値性保存の適応積分とモニタリング。"""

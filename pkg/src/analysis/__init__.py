"""解析: コンセンサス検証、Lyapunov・保存則レポート、保存量計算、境界駆動実験。"""

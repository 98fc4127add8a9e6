"""反応拡散コンパートメントネットワーク: 平衡反応ネットワークのDEC離散化シミュレーション・検証ツールキット。"""
